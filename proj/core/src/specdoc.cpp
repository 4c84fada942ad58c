#include "fpresheaf/specdoc.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fpresheaf/cachefile.hpp"
#include "fpresheaf/growth.hpp"
#include "fpresheaf/kappa.hpp"
#include "fpresheaf/pgroup.hpp"
#include "fpresheaf/version.hpp"

namespace fpre::spec {

namespace {

using json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_ident(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return !std::isdigit(static_cast<unsigned char>(s[0]));
}

struct Call {
    std::string callee;
    std::vector<std::string> positional;
    std::map<std::string, std::string> named;
};

Call parse_call(const std::string& expr, int line) {
    Call c;
    std::size_t open = expr.find('(');
    if (open == std::string::npos) {
        c.callee = trim(expr);
        return c;
    }
    if (expr.back() != ')')
        throw ParseError("expected ')' at end of expression", line, static_cast<int>(expr.size()));
    c.callee = trim(expr.substr(0, open));
    std::string args = expr.substr(open + 1, expr.size() - open - 2);
    std::string cur;
    std::vector<std::string> parts;
    for (char ch : args) {
        if (ch == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!trim(cur).empty() || !parts.empty()) parts.push_back(cur);
    for (auto& raw : parts) {
        std::string a = trim(raw);
        if (a.empty()) throw ParseError("empty argument", line, static_cast<int>(open));
        std::size_t eq = a.find('=');
        if (eq != std::string::npos && is_ident(trim(a.substr(0, eq)))) {
            c.named[trim(a.substr(0, eq))] = trim(a.substr(eq + 1));
        } else {
            c.positional.push_back(a);
        }
    }
    return c;
}

long parse_int(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (...) {
        throw ParseError("expected an integer, got '" + s + "'", line, 0);
    }
}

} // namespace

SpecDocument parse(const std::string& text) {
    SpecDocument doc;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    bool saw_set = false;
    while (std::getline(is, raw)) {
        ++line_no;
        std::size_t hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "set") {
            std::string tok;
            while (ls >> tok) {
                std::size_t eq = tok.find('=');
                if (eq == std::string::npos)
                    throw ParseError("expected key=value in set, got '" + tok + "'", line_no,
                                     static_cast<int>(line.find(tok)) + 1);
                std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "p")
                    doc.settings.p = static_cast<unsigned>(parse_int(val, line_no));
                else if (key == "window")
                    doc.settings.window = static_cast<int>(parse_int(val, line_no));
                else if (key == "cap")
                    doc.settings.cap = static_cast<std::uint64_t>(parse_int(val, line_no));
                else
                    throw ParseError("unknown setting '" + key + "'", line_no,
                                     static_cast<int>(line.find(tok)) + 1);
            }
            saw_set = true;
            (void)saw_set;
        } else if (head == "presheaf" || head == "linear" || head == "pgroup") {
            std::string name, eq;
            ls >> name >> eq;
            if (!is_ident(name))
                throw ParseError("expected a definition name", line_no,
                                 static_cast<int>(head.size()) + 2);
            if (eq != "=")
                throw ParseError("expected '=' after the name", line_no,
                                 static_cast<int>(line.find(name) + name.size()) + 1);
            std::string expr = trim(line.substr(line.find('=') + 1));
            if (expr.empty()) throw ParseError("empty definition", line_no, static_cast<int>(line.size()));
            DefKind kind = head == "presheaf" ? DefKind::Presheaf
                          : head == "linear"  ? DefKind::Linear
                                              : DefKind::PGroup;
            for (const auto& d : doc.definitions)
                if (d.name == name)
                    throw SemanticError("duplicate definition of '" + name + "'", line_no);
            doc.definitions.push_back({kind, name, expr, line_no});
        } else if (head == "analyze") {
            std::string rest = trim(line.substr(line.find("analyze") + 7));
            std::size_t colon = rest.find(':');
            if (colon == std::string::npos)
                throw ParseError("expected ':' in analyze statement", line_no,
                                 static_cast<int>(line.size()));
            AnalysisRequest req;
            req.target = trim(rest.substr(0, colon));
            req.line = line_no;
            if (!is_ident(req.target))
                throw ParseError("expected a target name before ':'", line_no,
                                 static_cast<int>(line.find("analyze")) + 8);
            Call c = parse_call(trim(rest.substr(colon + 1)), line_no);
            req.op = c.callee;
            req.args = c.named;
            for (std::size_t i = 0; i < c.positional.size(); ++i)
                req.args["arg" + std::to_string(i)] = c.positional[i];
            static const char* ops[] = {"growth", "degree", "rankfilt", "kappa",
                                        "hom",    "pfinite", "frattini", "augfilt"};
            bool known = false;
            for (auto* op : ops)
                if (req.op == op) known = true;
            if (!known)
                throw ParseError("unknown analysis '" + req.op + "'", line_no,
                                 static_cast<int>(rest.find(':')) + 2);
            doc.analyses.push_back(std::move(req));
        } else {
            throw ParseError("unknown statement '" + head + "'", line_no, 1);
        }
    }
    if (doc.settings.p != 2 && doc.settings.p != 3 && doc.settings.p != 5)
        throw SemanticError("p must be one of {2, 3, 5}", 1);
    if (doc.settings.window < 0 || doc.settings.window > 5)
        throw SemanticError("window must be in 0..5", 1);
    return doc;
}

SpecDocument parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open spec file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

namespace {

struct Env {
    std::shared_ptr<const site::TruncatedSite> site;
    Settings st;
    std::map<std::string, presheaf::SetPresheaf> presheaves;
    std::map<std::string, lin::LinFunctor> linears;
    std::map<std::string, pg::PGroupPresheaf> pgroups;
    std::map<std::string, std::string> def_exprs;

    DefKind kind_of(const std::string& name, int line) const {
        if (presheaves.count(name)) return DefKind::Presheaf;
        if (linears.count(name)) return DefKind::Linear;
        if (pgroups.count(name)) return DefKind::PGroup;
        throw SemanticError("unknown name '" + name + "'", line);
    }
};

const presheaf::SetPresheaf& need_presheaf(const Env& env, const std::string& name, int line) {
    auto it = env.presheaves.find(name);
    if (it == env.presheaves.end())
        throw SemanticError("'" + name + "' is not a presheaf definition", line);
    return it->second;
}

const lin::LinFunctor& need_linear(const Env& env, const std::string& name, int line) {
    auto it = env.linears.find(name);
    if (it == env.linears.end())
        throw SemanticError("'" + name + "' is not a linear definition", line);
    return it->second;
}

const pg::PGroupPresheaf& need_pgroup(const Env& env, const std::string& name, int line) {
    auto it = env.pgroups.find(name);
    if (it == env.pgroups.end())
        throw SemanticError("'" + name + "' is not a pgroup definition", line);
    return it->second;
}

std::uint32_t arg_uint(const Call& c, std::size_t i, int line) {
    if (i >= c.positional.size())
        throw SemanticError("missing argument " + std::to_string(i + 1) + " of " + c.callee, line);
    long v = parse_int(c.positional[i], line);
    if (v < 0) throw SemanticError("argument must be nonnegative", line);
    return static_cast<std::uint32_t>(v);
}

lin::LinFunctor build_linear(const Env& env, const std::string& expr, int line);

presheaf::SetPresheaf build_presheaf(const Env& env, const std::string& expr, int line) {
    Call c = parse_call(expr, line);
    const auto& site = env.site;
    std::uint64_t cap = env.st.cap;
    if (c.callee == "sym") return lin::sets_of(lin::sym_power(site, arg_uint(c, 0, line)), cap);
    if (c.callee == "ext") return lin::sets_of(lin::ext_power(site, arg_uint(c, 0, line)), cap);
    if (c.callee == "gr_le") {
        std::uint32_t n = arg_uint(c, 0, line);
        if (static_cast<int>(n) > env.st.window)
            throw SemanticError("gr_le parameter exceeds the window", line);
        return presheaf::gr_le(site, n);
    }
    if (c.callee == "gr") {
        std::uint32_t n = arg_uint(c, 0, line);
        if (static_cast<int>(n) > env.st.window)
            throw SemanticError("gr parameter exceeds the window", line);
        return presheaf::gr(site, n);
    }
    if (c.callee == "homset") return presheaf::homset(site, arg_uint(c, 0, line), cap);
    if (c.callee == "ibar") return lin::sets_of(lin::ibar(site, cap), cap);
    if (c.callee == "sets") {
        if (c.positional.size() != 1)
            throw SemanticError("sets(<linear-name>) takes one name", line);
        return lin::sets_of(need_linear(env, c.positional[0], line), cap);
    }
    if (c.callee == "product" || c.callee == "coproduct" || c.callee == "wedge") {
        if (c.positional.size() != 2)
            throw SemanticError(c.callee + "(a,b) takes two presheaf names", line);
        const auto& a = need_presheaf(env, c.positional[0], line);
        const auto& b = need_presheaf(env, c.positional[1], line);
        if (c.callee == "product") return presheaf::product(a, b);
        if (c.callee == "coproduct") return presheaf::coproduct(a, b);
        return presheaf::wedge(a, b);
    }
    if (c.callee == "induced") {
        auto it_n = c.named.find("n");
        auto it_t = c.named.find("table");
        if (it_n == c.named.end() || it_t == c.named.end())
            throw SemanticError("induced needs n=<int>, table=<path>", line);
        long n = parse_int(it_n->second, line);
        if (n < 0 || n > env.st.window)
            throw SemanticError("induced n outside the window", line);
        std::ifstream probe(it_t->second);
        if (!probe) throw SemanticError("table file does not exist: " + it_t->second, line);
        presheaf::EndSetTable z = presheaf::EndSetTable::load(it_t->second);
        if (z.n != static_cast<std::uint32_t>(n))
            throw SemanticError("table header n does not match the induced n", line);
        std::string err = z.validate(env.st.cap);
        if (!err.empty()) throw SemanticError("invalid End-set table: " + err, line);
        return presheaf::induced(site, z, cap);
    }
    if (c.callee == "splitrank") {
        if (c.positional.size() != 1)
            throw SemanticError("splitrank(<linear-name>) takes one name", line);
        return lin::splitrank(need_linear(env, c.positional[0], line), cap);
    }
    throw SemanticError("unknown presheaf builder '" + c.callee + "'", line);
}

lin::LinFunctor build_linear(const Env& env, const std::string& expr, int line) {
    Call c = parse_call(expr, line);
    const auto& site = env.site;
    std::uint64_t cap = env.st.cap;
    if (c.callee == "sym") return lin::sym_power(site, arg_uint(c, 0, line));
    if (c.callee == "ext") return lin::ext_power(site, arg_uint(c, 0, line));
    if (c.callee == "freehom") return lin::free_hom(site, arg_uint(c, 0, line), cap);
    if (c.callee == "ibar") return lin::ibar(site, cap);
    if (c.callee == "sum" || c.callee == "tensor") {
        if (c.positional.size() != 2)
            throw SemanticError(c.callee + "(a,b) takes two linear names", line);
        const auto& a = need_linear(env, c.positional[0], line);
        const auto& b = need_linear(env, c.positional[1], line);
        return c.callee == "sum" ? lin::direct_sum(a, b) : lin::tensor(a, b);
    }
    if (c.callee == "linearize") {
        if (c.positional.size() != 1)
            throw SemanticError("linearize(<presheaf-name>) takes one name", line);
        return lin::linearize(need_presheaf(env, c.positional[0], line));
    }
    throw SemanticError("unknown linear builder '" + c.callee + "'", line);
}

pg::PGroupPresheaf build_pgroup(const Env& env, const std::string& expr, int line) {
    Call c = parse_call(expr, line);
    if (c.callee == "heisenberg") return pg::heisenberg(env.site);
    if (c.callee == "elemab") {
        if (c.positional.size() != 1)
            throw SemanticError("elemab(<linear-name>) takes one name", line);
        return pg::elem_abelian(need_linear(env, c.positional[0], line));
    }
    if (c.callee == "zmod") {
        if (c.positional.size() != 1) throw SemanticError("zmod(p^e) takes one prime power", line);
        std::string arg = c.positional[0];
        unsigned base = env.st.p;
        unsigned e = 0;
        std::size_t caret = arg.find('^');
        std::uint64_t q;
        if (caret != std::string::npos) {
            base = static_cast<unsigned>(parse_int(arg.substr(0, caret), line));
            e = static_cast<unsigned>(parse_int(arg.substr(caret + 1), line));
            q = fp::pow_u64(base, e);
        } else {
            q = static_cast<std::uint64_t>(parse_int(arg, line));
            std::uint64_t m = q;
            while (m > 1 && m % env.st.p == 0) {
                m /= env.st.p;
                ++e;
            }
            if (m != 1) throw SemanticError("zmod argument must be a power of the configured p", line);
        }
        if (base != env.st.p)
            throw SemanticError("zmod base must equal the configured prime", line);
        if (e == 1) return pg::elem_abelian(lin::sym_power(env.site, 1));
        if (e == 2 && env.st.p == 2) {
            // no strict functor has values (Z/4)^dim; the symmetric-square
            // cocycle extension is the functorial stand-in at p = 2
            return pg::witt_sym(env.site);
        }
        throw SemanticError("zmod(p^e) supported for e = 1, and e = 2 at p = 2", line);
    }
    throw SemanticError("unknown pgroup builder '" + c.callee + "'", line);
}

// ------------------------------------------------------------- analyses

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct ResultBuilder {
    AnalysisResult res;
    json payload = json::object();
    std::string csv_header = "key,value";
    std::vector<std::pair<std::string, std::string>> kv;

    ResultBuilder(const std::string& name, const std::string& op) {
        res.name = name;
        res.analysis = op;
        payload["name"] = name;
        payload["analysis"] = op;
    }
    void add(const std::string& key, const json& val, const std::string& printed) {
        payload[key] = val;
        kv.emplace_back(key, printed);
    }
    AnalysisResult finish(const std::string& explicit_csv = {}) {
        res.text_lines.push_back("== " + res.analysis + " " + res.name);
        for (auto& [k, v] : kv) res.text_lines.push_back(k + ": " + v);
        std::string block = "# name=" + res.name + ",analysis=" + res.analysis + "\n";
        if (!explicit_csv.empty()) {
            block += explicit_csv;
        } else {
            block += csv_header + "\n";
            for (auto& [k, v] : kv) {
                std::string vq = v;
                for (auto& ch : vq)
                    if (ch == ',') ch = ';';
                block += k + "," + vq + "\n";
            }
        }
        res.csv_block = std::move(block);
        res.jsonl = payload.dump();
        return std::move(res);
    }
};

std::string join_u32(const std::vector<std::uint32_t>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s.push_back(',');
        s += std::to_string(v[i]);
    }
    s.push_back(')');
    return s;
}

AnalysisResult run_growth(const Env& env, const AnalysisRequest& req) {
    growth::GrowthProfile prof;
    DefKind kind = env.kind_of(req.target, req.line);
    if (kind == DefKind::Presheaf)
        prof = growth::profile(env.presheaves.at(req.target));
    else if (kind == DefKind::Linear)
        prof = growth::profile(env.linears.at(req.target));
    else {
        const auto& g = env.pgroups.at(req.target);
        std::vector<std::uint32_t> exps;
        unsigned p = env.st.p;
        for (int d = 0; d <= env.st.window; ++d) {
            std::uint64_t n = g.group(d).order();
            std::uint32_t e = 0;
            while (n > 1) {
                n /= p;
                ++e;
            }
            exps.push_back(e);
        }
        prof = growth::profile_from_p_exponents(exps);
    }
    growth::DegreeFit fit = growth::degree_fit(prof);
    ResultBuilder rb(req.target, "growth");
    json cards = json::array(), logs = json::array();
    std::string card_s, log_s;
    for (std::size_t t = 0; t < prof.points.size(); ++t) {
        cards.push_back(growth::cardinality_string(prof.points[t]));
        logs.push_back(growth::log_string(prof.points[t].log_p));
        if (t) {
            card_s += ",";
            log_s += ",";
        }
        card_s += growth::cardinality_string(prof.points[t]);
        log_s += growth::log_string(prof.points[t].log_p);
    }
    rb.add("cardinalities", cards, card_s);
    rb.add("log_p", logs, log_s);
    rb.add("degree_fit", growth::fit_to_string(fit), growth::fit_to_string(fit));
    rb.res.limited = (fit.kind == growth::FitKind::NonPolynomialOnWindow);
    return rb.finish(growth::to_csv(prof));
}

AnalysisResult run_degree(const Env& env, const AnalysisRequest& req) {
    DefKind kind = env.kind_of(req.target, req.line);
    ResultBuilder rb(req.target, "degree");
    if (kind == DefKind::Presheaf) {
        lin::FinitenessResult fr =
            lin::finiteness_degree(env.presheaves.at(req.target), env.st.cap);
        if (fr.degree) {
            rb.add("finiteness_degree", *fr.degree, std::to_string(*fr.degree));
        } else {
            rb.add("finiteness_degree", "NotDetectedInWindow", "NotDetectedInWindow");
            rb.res.limited = true;
        }
        json tower = json::array();
        std::string tower_s;
        for (std::size_t n = 0; n < fr.tower.size(); ++n) {
            tower.push_back(fr.tower[n].sizes());
            if (n) tower_s += " ";
            tower_s += "X" + std::to_string(n) + "=" + join_u32(fr.tower[n].sizes());
        }
        rb.add("tower_sizes", tower, tower_s);
    } else if (kind == DefKind::Linear) {
        const auto& f = env.linears.at(req.target);
        lin::PolyDegreeResult pd = lin::poly_degree(f);
        if (pd.degree)
            rb.add("poly_degree", *pd.degree, std::to_string(*pd.degree));
        else {
            rb.add("poly_degree", "ExceedsWindow", "ExceedsWindow");
            rb.res.limited = true;
        }
        rb.add("cross_effect_dims", pd.cr_dims, join_u32(pd.cr_dims));
        growth::DegreeFit fit = growth::degree_fit(growth::profile(f));
        rb.add("growth_degree", growth::fit_to_string(fit), growth::fit_to_string(fit));
    } else {
        const auto& g = env.pgroups.at(req.target);
        pg::GroupPolyDegree gd = pg::group_poly_degree(g);
        if (gd.degree)
            rb.add("group_poly_degree", *gd.degree, std::to_string(*gd.degree));
        else {
            rb.add("group_poly_degree", "ExceedsWindow", "ExceedsWindow");
            rb.res.limited = true;
        }
        json orders = json::array();
        std::string s;
        for (std::size_t i = 0; i < gd.cr_orders.size(); ++i) {
            orders.push_back(gd.cr_orders[i]);
            if (i) s += ",";
            s += std::to_string(gd.cr_orders[i]);
        }
        rb.add("cross_effect_orders", orders, "(" + s + ")");
    }
    return rb.finish();
}

AnalysisResult run_rankfilt(const Env& env, const AnalysisRequest& req) {
    DefKind kind = env.kind_of(req.target, req.line);
    if (kind != DefKind::Presheaf)
        throw SemanticError("rankfilt applies to presheaf definitions", req.line);
    const auto& x = env.presheaves.at(req.target);
    presheaf::RankFiltration filt = presheaf::rank_filtration(x);
    ResultBuilder rb(req.target, "rankfilt");
    std::vector<std::uint32_t> reg;
    for (const auto& r : filt.regular) reg.push_back(static_cast<std::uint32_t>(r.size()));
    rb.add("regular_counts", reg, join_u32(reg));
    json le = json::array();
    std::string le_s;
    for (int n = 0; n <= x.window(); ++n) {
        std::vector<std::uint32_t> sizes;
        for (int d = 0; d <= x.window(); ++d)
            sizes.push_back(static_cast<std::uint32_t>(filt.le[n][d].size()));
        le.push_back(sizes);
        if (n) le_s += " ";
        le_s += "<=" + std::to_string(n) + ":" + join_u32(sizes);
    }
    rb.add("filtration_sizes", le, le_s);
    bool all_ok = true;
    for (std::uint32_t n = 0; n <= static_cast<std::uint32_t>(x.window()); ++n)
        for (std::uint32_t v = 0; v <= static_cast<std::uint32_t>(x.window()); ++v) {
            auto c = presheaf::subquotient_count_check(x, filt, n, v);
            if (!c.ok) all_ok = false;
        }
    rb.add("subquotient_counts_ok", all_ok, all_ok ? "true" : "false");
    rb.add("regular_aut_stable", presheaf::regular_sets_aut_stable(x, filt),
           presheaf::regular_sets_aut_stable(x, filt) ? "true" : "false");
    return rb.finish();
}

AnalysisResult run_kappa(const Env& env, const AnalysisRequest& req) {
    DefKind kind = env.kind_of(req.target, req.line);
    if (kind != DefKind::Presheaf)
        throw SemanticError("kappa applies to presheaf definitions", req.line);
    auto it = req.args.find("max");
    if (it == req.args.end()) throw SemanticError("kappa needs max=<int>", req.line);
    long m = parse_int(it->second, req.line);
    if (m < 0) throw SemanticError("kappa max must be nonnegative", req.line);
    kappa::PoincareSeries s =
        kappa::poincare(env.presheaves.at(req.target), static_cast<std::uint32_t>(m), env.st.cap);
    ResultBuilder rb(req.target, "kappa");
    rb.add("dims", s.dims, join_u32(s.dims));
    bool any_rel = false;
    for (bool b : s.window_relative) any_rel |= b;
    rb.add("window_relative_tail", any_rel, any_rel ? "true" : "false");
    rb.res.limited = any_rel;
    return rb.finish(kappa::poincare_csv(s));
}

AnalysisResult run_hom(const Env& env, const AnalysisRequest& req) {
    auto it = req.args.find("arg0");
    if (it == req.args.end()) throw SemanticError("hom needs a target name", req.line);
    const std::string& other = it->second;
    DefKind src_kind = env.kind_of(req.target, req.line);
    DefKind tgt_kind = env.kind_of(other, req.line);
    ResultBuilder rb(req.target, "hom");
    rb.add("target", other, other);
    if (src_kind == DefKind::Linear && tgt_kind == DefKind::Linear) {
        auto basis = lin::nat_hom(env.linears.at(req.target), env.linears.at(other));
        rb.add("nat_hom_dim", basis.size(), std::to_string(basis.size()));
    } else if (src_kind == DefKind::Presheaf && tgt_kind == DefKind::Linear) {
        std::size_t d = lin::set_hom_linear_count_log(env.presheaves.at(req.target),
                                                      env.linears.at(other));
        rb.add("log_p_count", d, std::to_string(d));
    } else if (src_kind == DefKind::Presheaf && tgt_kind == DefKind::Presheaf) {
        const auto& x = env.presheaves.at(req.target);
        const auto& y = env.presheaves.at(other);
        lin::FinitenessResult fy = lin::finiteness_degree(y, env.st.cap);
        if (!fy.degree) {
            rb.add("count", "NotDetectedInWindow", "NotDetectedInWindow");
            rb.res.limited = true;
            return rb.finish();
        }
        lin::LinFunctor fyl = lin::linearize(y);
        lin::QnResult q = lin::q_n(fyl, static_cast<std::uint32_t>(*fy.degree), env.st.cap);
        lin::EmbeddedTarget t;
        t.y = &y;
        t.g = &q.quotient;
        t.emb.resize(y.window() + 1);
        for (int d = 0; d <= y.window(); ++d)
            for (std::uint32_t i = 0; i < y.size(d); ++i)
                t.emb[d].push_back(q.projection.levels[d].col_vec(i));
        auto maps = lin::set_hom_tables(x, t, env.st.cap);
        rb.add("count", maps.size(), std::to_string(maps.size()));
    } else {
        throw SemanticError("hom supports presheaf->presheaf, presheaf->linear, linear->linear",
                            req.line);
    }
    return rb.finish();
}

AnalysisResult run_pfinite(const Env& env, const AnalysisRequest& req) {
    if (env.kind_of(req.target, req.line) != DefKind::PGroup)
        throw SemanticError("pfinite applies to pgroup definitions", req.line);
    pg::PFiniteResult r = pg::p_finite_test(env.pgroups.at(req.target));
    ResultBuilder rb(req.target, "pfinite");
    rb.add("verdict", r.p_finite ? "PFinite" : "NotDetectedInWindow",
           r.p_finite ? "PFinite" : "NotDetectedInWindow");
    if (r.degree.degree)
        rb.add("graded_degree", *r.degree.degree, std::to_string(*r.degree.degree));
    else
        rb.add("graded_degree", "ExceedsWindow", "ExceedsWindow");
    rb.add("series_length", r.series_length, std::to_string(r.series_length));
    rb.add("gamma_exponents", r.gamma_exponents, join_u32(r.gamma_exponents));
    rb.add("gamma_fit", growth::fit_to_string(r.gamma_fit), growth::fit_to_string(r.gamma_fit));
    rb.res.limited = !r.p_finite;
    return rb.finish();
}

AnalysisResult run_frattini(const Env& env, const AnalysisRequest& req) {
    if (env.kind_of(req.target, req.line) != DefKind::PGroup)
        throw SemanticError("frattini applies to pgroup definitions", req.line);
    pg::FrattiniSeries s = pg::p_derived_series(env.pgroups.at(req.target));
    ResultBuilder rb(req.target, "frattini");
    rb.add("length", s.length(), std::to_string(s.length()));
    json graded = json::array();
    std::string gs;
    for (std::size_t i = 0; i < s.graded.size(); ++i) {
        graded.push_back(s.graded[i].dims());
        if (i) gs += " ";
        gs += "gr" + std::to_string(i) + "=" + join_u32(s.graded[i].dims());
    }
    rb.add("graded_dims", graded, gs);
    return rb.finish();
}

AnalysisResult run_augfilt(const Env& env, const AnalysisRequest& req) {
    if (env.kind_of(req.target, req.line) != DefKind::PGroup)
        throw SemanticError("augfilt applies to pgroup definitions", req.line);
    auto it = req.args.find("dim");
    if (it == req.args.end()) throw SemanticError("augfilt needs dim=<int>", req.line);
    long d = parse_int(it->second, req.line);
    if (d < 0 || d > env.st.window)
        throw SemanticError("augfilt dim outside the window", req.line);
    const auto& g = env.pgroups.at(req.target);
    pg::AugmentationFiltration a = pg::augmentation_filtration(g.group(static_cast<std::uint32_t>(d)));
    ResultBuilder rb(req.target, "augfilt");
    rb.add("dim", d, std::to_string(d));
    rb.add("power_dims", a.power_dims, join_u32(a.power_dims));
    if (a.nilpotency_index)
        rb.add("nilpotency_index", *a.nilpotency_index, std::to_string(*a.nilpotency_index));
    else {
        rb.add("nilpotency_index", "NotReached", "NotReached");
        rb.res.limited = true;
    }
    rb.add("dim_I_mod_I2", a.dim_i_mod_i2, std::to_string(a.dim_i_mod_i2));
    rb.add("dim_G_mod_Phi", a.dim_g_mod_frattini, std::to_string(a.dim_g_mod_frattini));
    rb.add("abelianization_match", a.abelianization_match, a.abelianization_match ? "true" : "false");
    return rb.finish();
}

AnalysisResult run_one(const Env& env, const AnalysisRequest& req) {
    if (req.op == "growth") return run_growth(env, req);
    if (req.op == "degree") return run_degree(env, req);
    if (req.op == "rankfilt") return run_rankfilt(env, req);
    if (req.op == "kappa") return run_kappa(env, req);
    if (req.op == "hom") return run_hom(env, req);
    if (req.op == "pfinite") return run_pfinite(env, req);
    if (req.op == "frattini") return run_frattini(env, req);
    if (req.op == "augfilt") return run_augfilt(env, req);
    throw SemanticError("unknown analysis '" + req.op + "'", req.line);
}

} // namespace

bool Report::any_limited() const {
    for (const auto& r : results)
        if (r.limited) return true;
    return false;
}

Report run(const SpecDocument& doc, const RunOptions& opt) {
    fp::set_prime(doc.settings.p);
    Env env;
    env.st = doc.settings;
    env.site = site::make_site(doc.settings.window);
    if (!opt.cache_dir.empty()) cache::load_factor_cache(*env.site, opt.cache_dir);

    for (const auto& def : doc.definitions) {
        env.def_exprs[def.name] = def.expr;
        switch (def.kind) {
            case DefKind::Presheaf: {
                presheaf::SetPresheaf x = build_presheaf(env, def.expr, def.line);
                x.set_name(def.name);
                if (!opt.cache_dir.empty())
                    cache::load_act_tables(
                        x, opt.cache_dir,
                        cache::definition_hash(def.expr, env.st.p, env.st.window));
                env.presheaves.emplace(def.name, std::move(x));
                break;
            }
            case DefKind::Linear: {
                lin::LinFunctor f = build_linear(env, def.expr, def.line);
                f.set_name(def.name);
                env.linears.emplace(def.name, std::move(f));
                break;
            }
            case DefKind::PGroup: {
                pg::PGroupPresheaf g = build_pgroup(env, def.expr, def.line);
                env.pgroups.emplace(def.name, std::move(g));
                break;
            }
        }
    }

    Report rep;
    rep.settings = doc.settings;
    rep.seed = opt.seed;
    rep.version = kVersion;
    rep.results.resize(doc.analyses.size());

    auto worker_body = [&](const AnalysisRequest& req) -> AnalysisResult {
        try {
            return run_one(env, req);
        } catch (const SemanticError&) {
            throw;
        } catch (const Error& e) {
            throw SemanticError("analysis '" + req.op + "' of '" + req.target + "': " + e.what(),
                                req.line);
        }
    };

    int threads = std::max(1, opt.threads);
    if (threads == 1 || doc.analyses.size() <= 1) {
        for (std::size_t i = 0; i < doc.analyses.size(); ++i)
            rep.results[i] = worker_body(doc.analyses[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(doc.analyses.size());
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                while (true) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= doc.analyses.size()) break;
                    try {
                        rep.results[i] = worker_body(doc.analyses[i]);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    if (!opt.cache_dir.empty()) {
        cache::save_factor_cache(*env.site, opt.cache_dir);
        for (const auto& [name, x] : env.presheaves)
            cache::save_act_tables(x, opt.cache_dir,
                                   cache::definition_hash(env.def_exprs.at(name), env.st.p,
                                                          env.st.window));
    }
    return rep;
}

std::string emit(const Report& r, const std::string& format) {
    std::string out;
    if (format == "text") {
        out += "fpresheaf " + r.version + " (p=" + std::to_string(r.settings.p) +
               ", window=" + std::to_string(r.settings.window) +
               ", cap=" + std::to_string(r.settings.cap) + ", seed=" + std::to_string(r.seed) +
               ")\n";
        for (const auto& res : r.results) {
            for (const auto& l : res.text_lines) {
                out += l;
                out.push_back('\n');
            }
        }
        return out;
    }
    if (format == "csv") {
        out += "# fpresheaf,version=" + r.version + ",p=" + std::to_string(r.settings.p) +
               ",window=" + std::to_string(r.settings.window) +
               ",cap=" + std::to_string(r.settings.cap) + ",seed=" + std::to_string(r.seed) + "\n";
        for (const auto& res : r.results) out += res.csv_block;
        return out;
    }
    if (format == "jsonl") {
        json prov;
        prov["tool"] = "fpresheaf";
        prov["version"] = r.version;
        prov["p"] = r.settings.p;
        prov["window"] = r.settings.window;
        prov["cap"] = r.settings.cap;
        prov["seed"] = r.seed;
        out += prov.dump();
        out.push_back('\n');
        for (const auto& res : r.results) {
            out += res.jsonl;
            out.push_back('\n');
        }
        return out;
    }
    throw UsageError("unknown format '" + format + "' (expected text, csv or jsonl)");
}

} // namespace fpre::spec

#include "fpresheaf/presheaf.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "fpresheaf/errors.hpp"

namespace fpre::presheaf {

namespace {

std::string hex_of_key(const std::string& k) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (unsigned char c : k) {
        s.push_back(digits[c >> 4]);
        s.push_back(digits[c & 15]);
    }
    return s;
}

std::string subspace_label(const FpMatrix& rref_rows) {
    if (rref_rows.rows() == 0) return "<0>";
    std::string s = "<";
    for (std::uint32_t r = 0; r < rref_rows.rows(); ++r) {
        if (r) s.push_back(',');
        for (std::uint32_t c = 0; c < rref_rows.cols(); ++c)
            s.push_back(static_cast<char>('0' + rref_rows.at(r, c)));
    }
    s.push_back('>');
    return s;
}

struct Dsu {
    std::vector<std::uint32_t> parent, size;
    explicit Dsu(std::uint32_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

} // namespace

// -------------------------------------------------------------- SetPresheaf

SetPresheaf::SetPresheaf(std::shared_ptr<const TruncatedSite> site, std::string name,
                         std::vector<std::uint32_t> sizes, std::vector<ActTable> gen_actions,
                         std::vector<std::vector<std::string>> labels)
    : site_(std::move(site)),
      name_(std::move(name)),
      sizes_(std::move(sizes)),
      gen_act_(std::move(gen_actions)),
      labels_(std::move(labels)) {
    if (sizes_.size() != static_cast<std::size_t>(site_->window()) + 1)
        throw UsageError("presheaf sizes must cover dimensions 0..window");
    if (gen_act_.size() != site_->generators().size())
        throw UsageError("presheaf must provide one action per site generator");
    for (std::uint32_t id = 0; id < gen_act_.size(); ++id) {
        const auto& g = site_->gen(id);
        if (gen_act_[id].size() != sizes_[g.dst])
            throw UsageError("generator action table has wrong length for " + g.label);
        for (auto v : gen_act_[id])
            if (v >= sizes_[g.src]) throw UsageError("generator action out of range for " + g.label);
    }
}

bool SetPresheaf::uniformly_empty() const {
    for (auto s : sizes_)
        if (s) return false;
    return true;
}

const ActTable& SetPresheaf::act(const FpMatrix& f) const {
    std::string key = f.key();
    {
        std::lock_guard<std::mutex> lk(cache_->mu);
        auto it = cache_->map.find(key);
        if (it != cache_->map.end()) return it->second;
    }
    site::Word w = site_->factor(f).flat();
    std::uint32_t b = f.rows();
    ActTable cur(sizes_[b]);
    std::iota(cur.begin(), cur.end(), 0u);
    for (auto id : w) {
        const ActTable& t = gen_act_[id];
        for (auto& x : cur) x = t[x];
    }
    std::lock_guard<std::mutex> lk(cache_->mu);
    auto [it, ok] = cache_->map.emplace(std::move(key), std::move(cur));
    return it->second;
}

std::string SetPresheaf::label(std::uint32_t d, std::uint32_t i) const {
    if (d < labels_.size() && i < labels_[d].size()) return labels_[d][i];
    return "#" + std::to_string(i);
}

std::vector<std::pair<std::string, ActTable>> SetPresheaf::export_act_cache() const {
    std::lock_guard<std::mutex> lk(cache_->mu);
    std::vector<std::pair<std::string, ActTable>> out(cache_->map.begin(), cache_->map.end());
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

void SetPresheaf::import_act_cache(const std::vector<std::pair<std::string, ActTable>>& entries) const {
    std::lock_guard<std::mutex> lk(cache_->mu);
    for (const auto& [key, table] : entries) {
        if (key.size() < 4) continue;
        auto b = static_cast<std::uint32_t>(static_cast<unsigned char>(key[0])) |
                 (static_cast<std::uint32_t>(static_cast<unsigned char>(key[1])) << 8);
        auto a = static_cast<std::uint32_t>(static_cast<unsigned char>(key[2])) |
                 (static_cast<std::uint32_t>(static_cast<unsigned char>(key[3])) << 8);
        if (b > static_cast<std::uint32_t>(window()) || a > static_cast<std::uint32_t>(window()))
            continue;
        if (table.size() != sizes_[b]) continue;
        bool ok = true;
        for (auto v : table)
            if (v >= sizes_[a]) { ok = false; break; }
        if (ok) cache_->map.emplace(key, table);
    }
}

// -------------------------------------------------------------- validation

ValidationReport validate(const SetPresheaf& x, const site::Schedule& sched) {
    ValidationReport rep;
    bool any = false, all = true;
    for (std::uint32_t d = 0; d <= static_cast<std::uint32_t>(x.window()); ++d) {
        if (x.size(d)) any = true;
        else all = false;
    }
    if (any && !all) {
        rep.ok = false;
        rep.witness = "sections must be nonempty at every dimension or uniformly empty";
        return rep;
    }
    x.site()->for_each_functoriality_pair(sched, [&](const FpMatrix& f, const FpMatrix& g) {
        const ActTable& tfg = x.act(f.mul(g));
        const ActTable& tf = x.act(f);
        const ActTable& tg = x.act(g);
        for (std::uint32_t s = 0; s < tfg.size(); ++s) {
            if (tfg[s] != tg[tf[s]]) {
                rep.ok = false;
                rep.witness = "act(f.g) != act(g).act(f) at section " + std::to_string(s) +
                              " for f=" + f.to_string() + " g=" + g.to_string();
                return false;
            }
        }
        return true;
    });
    return rep;
}

ValidationReport validate(const SetPresheaf& x, std::uint64_t seed) {
    return validate(x, x.site()->default_schedule(seed));
}

// -------------------------------------------------------------- constructions

namespace {

// Tabulate a presheaf from canonical per-dimension keys and a raw action.
SetPresheaf tabulate(std::shared_ptr<const TruncatedSite> site, std::string name,
                     const std::vector<std::vector<std::string>>& keys,
                     const std::vector<std::vector<std::string>>& labels,
                     const std::function<std::string(const FpMatrix&, std::uint32_t, std::uint32_t)>& act_key) {
    int n = site->window();
    std::vector<std::unordered_map<std::string, std::uint32_t>> index(n + 1);
    std::vector<std::uint32_t> sizes(n + 1);
    for (int d = 0; d <= n; ++d) {
        sizes[d] = static_cast<std::uint32_t>(keys[d].size());
        for (std::uint32_t i = 0; i < keys[d].size(); ++i)
            index[d].emplace(keys[d][i], i);
    }
    std::vector<ActTable> acts(site->generators().size());
    for (std::uint32_t id = 0; id < acts.size(); ++id) {
        const auto& g = site->gen(id);
        ActTable t(sizes[g.dst]);
        for (std::uint32_t xi = 0; xi < t.size(); ++xi) {
            std::string k = act_key(g.mat, g.dst, xi);
            auto it = index[g.src].find(k);
            if (it == index[g.src].end())
                throw UsageError("tabulate: action leaves the section set (" + name + ")");
            t[xi] = it->second;
        }
        acts[id] = std::move(t);
    }
    return SetPresheaf(std::move(site), std::move(name), std::move(sizes), std::move(acts), labels);
}

} // namespace

SetPresheaf one_point(std::shared_ptr<const TruncatedSite> site) {
    int n = site->window();
    std::vector<std::uint32_t> sizes(n + 1, 1);
    std::vector<ActTable> acts(site->generators().size());
    for (std::uint32_t id = 0; id < acts.size(); ++id)
        acts[id] = ActTable(1, 0);
    std::vector<std::vector<std::string>> labels(n + 1, std::vector<std::string>{"*"});
    return SetPresheaf(std::move(site), "*", std::move(sizes), std::move(acts), std::move(labels));
}

SetPresheaf empty_presheaf(std::shared_ptr<const TruncatedSite> site) {
    int n = site->window();
    std::vector<std::uint32_t> sizes(n + 1, 0);
    std::vector<ActTable> acts(site->generators().size());
    return SetPresheaf(std::move(site), "empty", std::move(sizes), std::move(acts));
}

namespace {

// Representative matrices (n x d, RREF rows padded with zeros) for the subspace
// elements of the Grassmannian builders.
FpMatrix padded_rep(const FpMatrix& rref_rows, std::uint32_t n) {
    FpMatrix rep(n, rref_rows.cols());
    for (std::uint32_t r = 0; r < rref_rows.rows(); ++r)
        rep.set_row(r, rref_rows.row_vec(r));
    return rep;
}

std::string rowspace_key(const FpMatrix& m) {
    linalg::RrefResult rr = linalg::rref(m);
    FpMatrix basis(rr.rank, m.cols());
    for (std::uint32_t r = 0; r < rr.rank; ++r)
        basis.set_row(r, rr.reduced.row_vec(r));
    return basis.key();
}

} // namespace

SetPresheaf gr_le(std::shared_ptr<const TruncatedSite> site, std::uint32_t n) {
    int w = site->window();
    std::vector<std::vector<std::string>> keys(w + 1), labels(w + 1);
    std::vector<std::vector<FpMatrix>> reps(w + 1);
    std::vector<std::unordered_map<std::string, std::uint32_t>> index(w + 1);
    for (int d = 0; d <= w; ++d) {
        for (std::uint32_t k = 0; k <= std::min<std::uint32_t>(n, d); ++k) {
            for (const FpMatrix& s : linalg::enumerate_subspaces(d, k)) {
                keys[d].push_back(s.key());
                labels[d].push_back(subspace_label(s));
                reps[d].push_back(padded_rep(s, n));
            }
        }
        for (std::uint32_t i = 0; i < keys[d].size(); ++i)
            index[d].emplace(keys[d][i], i);
    }
    auto act_key = [reps](const FpMatrix& f, std::uint32_t dst, std::uint32_t xi) {
        return rowspace_key(reps[dst][xi].mul(f));
    };
    return tabulate(std::move(site), "gr_le(" + std::to_string(n) + ")", keys, labels, act_key);
}

SetPresheaf gr(std::shared_ptr<const TruncatedSite> site, std::uint32_t n) {
    int w = site->window();
    std::vector<std::vector<std::string>> keys(w + 1), labels(w + 1);
    std::vector<std::vector<FpMatrix>> reps(w + 1);
    for (int d = 0; d <= w; ++d) {
        keys[d].push_back("*");
        labels[d].push_back("*");
        reps[d].push_back(FpMatrix(n, d));
        if (static_cast<std::uint32_t>(d) >= n) {
            for (const FpMatrix& s : linalg::enumerate_subspaces(d, n)) {
                keys[d].push_back(s.key());
                labels[d].push_back(subspace_label(s));
                reps[d].push_back(padded_rep(s, n));
            }
        }
    }
    auto act_key = [reps, n](const FpMatrix& f, std::uint32_t dst, std::uint32_t xi) -> std::string {
        if (xi == 0) return "*";
        FpMatrix sf = reps[dst][xi].mul(f);
        if (linalg::rank(sf) < n) return "*";
        return rowspace_key(sf);
    };
    return tabulate(std::move(site), "gr(" + std::to_string(n) + ")", keys, labels, act_key);
}

SetPresheaf homset(std::shared_ptr<const TruncatedSite> site, std::uint32_t n, std::uint64_t cap) {
    int w = site->window();
    std::vector<std::uint32_t> sizes(w + 1);
    for (int d = 0; d <= w; ++d) {
        std::uint64_t c = linalg::hom_count(d, n);
        if (c > cap) throw CapExceeded("homset(" + std::to_string(n) + ") at dimension " + std::to_string(d));
        sizes[d] = static_cast<std::uint32_t>(c);
    }
    std::vector<ActTable> acts(site->generators().size());
    for (std::uint32_t id = 0; id < acts.size(); ++id) {
        const auto& g = site->gen(id);
        ActTable t(sizes[g.dst]);
        for (std::uint32_t xi = 0; xi < t.size(); ++xi) {
            FpMatrix s = FpMatrix::from_index(g.dst, n, xi);
            t[xi] = static_cast<std::uint32_t>(s.mul(g.mat).to_index());
        }
        acts[id] = std::move(t);
    }
    return SetPresheaf(std::move(site), "homset(" + std::to_string(n) + ")", std::move(sizes),
                       std::move(acts));
}

SetPresheaf product(const SetPresheaf& x, const SetPresheaf& y) {
    if (x.site() != y.site()) throw UsageError("product: presheaves on different sites");
    int w = x.window();
    std::vector<std::uint32_t> sizes(w + 1);
    for (int d = 0; d <= w; ++d) sizes[d] = x.size(d) * y.size(d);
    std::vector<ActTable> acts(x.site()->generators().size());
    for (std::uint32_t id = 0; id < acts.size(); ++id) {
        const auto& g = x.site()->gen(id);
        const ActTable& tx = x.gen_action(id);
        const ActTable& ty = y.gen_action(id);
        ActTable t(sizes[g.dst]);
        for (std::uint32_t xi = 0; xi < x.size(g.dst); ++xi)
            for (std::uint32_t yi = 0; yi < y.size(g.dst); ++yi)
                t[xi * y.size(g.dst) + yi] = tx[xi] * y.size(g.src) + ty[yi];
        acts[id] = std::move(t);
    }
    return SetPresheaf(x.site(), "(" + x.name() + " x " + y.name() + ")", std::move(sizes),
                       std::move(acts));
}

SetPresheaf coproduct(const SetPresheaf& x, const SetPresheaf& y) {
    if (x.site() != y.site()) throw UsageError("coproduct: presheaves on different sites");
    int w = x.window();
    std::vector<std::uint32_t> sizes(w + 1);
    for (int d = 0; d <= w; ++d) sizes[d] = x.size(d) + y.size(d);
    std::vector<ActTable> acts(x.site()->generators().size());
    for (std::uint32_t id = 0; id < acts.size(); ++id) {
        const auto& g = x.site()->gen(id);
        const ActTable& tx = x.gen_action(id);
        const ActTable& ty = y.gen_action(id);
        ActTable t(sizes[g.dst]);
        for (std::uint32_t xi = 0; xi < x.size(g.dst); ++xi) t[xi] = tx[xi];
        for (std::uint32_t yi = 0; yi < y.size(g.dst); ++yi)
            t[x.size(g.dst) + yi] = x.size(g.src) + ty[yi];
        acts[id] = std::move(t);
    }
    return SetPresheaf(x.site(), "(" + x.name() + " + " + y.name() + ")", std::move(sizes),
                       std::move(acts));
}

namespace {

// basepoint of a connected presheaf at each dimension: image of the unique
// section at dimension 0 under the action of F^d -> 0
std::vector<std::uint32_t> basepoints(const SetPresheaf& x) {
    std::vector<std::uint32_t> bp(x.window() + 1);
    for (int d = 0; d <= x.window(); ++d)
        bp[d] = x.act(FpMatrix(0, d))[0];
    return bp;
}

} // namespace

SetPresheaf wedge(const SetPresheaf& x, const SetPresheaf& y) {
    if (x.site() != y.site()) throw UsageError("wedge: presheaves on different sites");
    if (x.size(0) != 1 || y.size(0) != 1)
        throw UsageError("wedge requires connected presheaves (|X(0)| = |Y(0)| = 1)");
    int w = x.window();
    std::vector<std::uint32_t> bx = basepoints(x), by = basepoints(y);
    // index layout per dim: 0 = joint basepoint, then x != bx, then y != by
    std::vector<std::uint32_t> sizes(w + 1);
    std::vector<std::vector<std::uint32_t>> xslot(w + 1), yslot(w + 1);
    for (int d = 0; d <= w; ++d) {
        sizes[d] = x.size(d) + y.size(d) - 1;
        xslot[d].assign(x.size(d), 0);
        yslot[d].assign(y.size(d), 0);
        std::uint32_t next = 1;
        for (std::uint32_t i = 0; i < x.size(d); ++i)
            xslot[d][i] = (i == bx[d]) ? 0 : next++;
        for (std::uint32_t i = 0; i < y.size(d); ++i)
            yslot[d][i] = (i == by[d]) ? 0 : next++;
    }
    std::vector<ActTable> acts(x.site()->generators().size());
    for (std::uint32_t id = 0; id < acts.size(); ++id) {
        const auto& g = x.site()->gen(id);
        const ActTable& tx = x.gen_action(id);
        const ActTable& ty = y.gen_action(id);
        ActTable t(sizes[g.dst]);
        t[0] = 0;
        for (std::uint32_t i = 0; i < x.size(g.dst); ++i)
            if (i != bx[g.dst]) t[xslot[g.dst][i]] = xslot[g.src][tx[i]];
        for (std::uint32_t i = 0; i < y.size(g.dst); ++i)
            if (i != by[g.dst]) t[yslot[g.dst][i]] = yslot[g.src][ty[i]];
        acts[id] = std::move(t);
    }
    return SetPresheaf(x.site(), "(" + x.name() + " v " + y.name() + ")", std::move(sizes),
                       std::move(acts));
}

SetPresheaf subpresheaf(const SetPresheaf& x, const std::vector<std::vector<std::uint32_t>>& keep,
                        std::string name) {
    int w = x.window();
    std::vector<std::vector<std::uint32_t>> slot(w + 1);
    std::vector<std::uint32_t> sizes(w + 1);
    for (int d = 0; d <= w; ++d) {
        slot[d].assign(x.size(d), UINT32_MAX);
        for (std::uint32_t i = 0; i < keep[d].size(); ++i)
            slot[d][keep[d][i]] = i;
        sizes[d] = static_cast<std::uint32_t>(keep[d].size());
    }
    std::vector<ActTable> acts(x.site()->generators().size());
    std::vector<std::vector<std::string>> labels(w + 1);
    for (int d = 0; d <= w; ++d)
        for (auto i : keep[d]) labels[d].push_back(x.label(d, i));
    for (std::uint32_t id = 0; id < acts.size(); ++id) {
        const auto& g = x.site()->gen(id);
        const ActTable& tx = x.gen_action(id);
        ActTable t(sizes[g.dst]);
        for (std::uint32_t i = 0; i < keep[g.dst].size(); ++i) {
            std::uint32_t img = slot[g.src][tx[keep[g.dst][i]]];
            if (img == UINT32_MAX) throw UsageError("subpresheaf: subset not action-closed");
            t[i] = img;
        }
        acts[id] = std::move(t);
    }
    return SetPresheaf(x.site(), std::move(name), std::move(sizes), std::move(acts), std::move(labels));
}

// -------------------------------------------------------------- components

std::vector<ConnectedComponent> components(const SetPresheaf& x) {
    int w = x.window();
    std::vector<ConnectedComponent> out(x.size(0));
    for (std::uint32_t b = 0; b < x.size(0); ++b) {
        out[b].basepoint = b;
        out[b].fibers.resize(w + 1);
    }
    for (int d = 0; d <= w; ++d) {
        const ActTable& to0 = x.act(FpMatrix(d, 0)); // action of 0 -> F^d
        for (std::uint32_t i = 0; i < x.size(d); ++i)
            out[to0[i]].fibers[d].push_back(i);
    }
    return out;
}

SetPresheaf component_presheaf(const SetPresheaf& x, const ConnectedComponent& c) {
    return subpresheaf(x, c.fibers, x.name() + "[" + std::to_string(c.basepoint) + "]");
}

// -------------------------------------------------------------- rank filtration

std::optional<int> RankFiltration::bounded_rank() const {
    int w = static_cast<int>(regular.size()) - 1;
    int top = -1;
    for (int k = 0; k <= w; ++k)
        if (!regular[k].empty()) top = k;
    if (top == w && !regular[w].empty() && w > 0) {
        // regular elements at the top of the window: not detectably bounded,
        // except when the window top itself is the only possibility
        return std::nullopt;
    }
    return std::max(top, 0);
}

RankFiltration rank_filtration(const SetPresheaf& x) {
    int w = x.window();
    RankFiltration out;
    out.le.assign(w + 1, {});
    out.regular.assign(w + 1, {});
    for (int n = 0; n <= w; ++n) {
        // close the sections at dimension n under all generator actions
        std::vector<std::vector<bool>> in(w + 1);
        for (int d = 0; d <= w; ++d) in[d].assign(x.size(d), false);
        std::vector<std::pair<int, std::uint32_t>> stack;
        for (std::uint32_t i = 0; i < x.size(n); ++i) {
            in[n][i] = true;
            stack.emplace_back(n, i);
        }
        while (!stack.empty()) {
            auto [d, i] = stack.back();
            stack.pop_back();
            for (std::uint32_t id = 0; id < x.site()->generators().size(); ++id) {
                const auto& g = x.site()->gen(id);
                if (static_cast<int>(g.dst) != d) continue;
                std::uint32_t j = x.gen_action(id)[i];
                if (!in[g.src][j]) {
                    in[g.src][j] = true;
                    stack.emplace_back(static_cast<int>(g.src), j);
                }
            }
        }
        out.le[n].assign(w + 1, {});
        for (int d = 0; d <= w; ++d)
            for (std::uint32_t i = 0; i < x.size(d); ++i)
                if (in[d][i]) out.le[n][d].push_back(i);
    }
    for (int n = 0; n <= w; ++n) {
        const std::vector<std::uint32_t>* prev = (n == 0) ? nullptr : &out.le[n - 1][n];
        for (std::uint32_t i = 0; i < x.size(n); ++i) {
            bool known = prev && std::binary_search(prev->begin(), prev->end(), i);
            if (!known) out.regular[n].push_back(i);
        }
    }
    return out;
}

CountCheck subquotient_count_check(const SetPresheaf& x, const RankFiltration& f,
                                   std::uint32_t n, std::uint32_t v_dim) {
    CountCheck c{};
    std::uint64_t cur = f.le[n][v_dim].size();
    std::uint64_t prev = (n == 0) ? 0 : f.le[n - 1][v_dim].size();
    c.new_elements = cur - prev;
    if (n > v_dim) {
        c.predicted = 0;
    } else {
        c.predicted = static_cast<std::uint64_t>(f.regular[n].size()) *
                      linalg::gaussian_binomial(v_dim, v_dim - n);
    }
    if (n == 0) c.new_elements = cur; // X_{<= -1} is empty
    // at n = 0 the predicted count is |X_reg(0)| * [v_dim choose v_dim]
    c.ok = (c.new_elements == c.predicted);
    return c;
}

bool regular_sets_aut_stable(const SetPresheaf& x, const RankFiltration& f) {
    for (int n = 0; n <= x.window(); ++n) {
        for (std::uint32_t id = 0; id < x.site()->generators().size(); ++id) {
            const auto& g = x.site()->gen(id);
            if (g.kind != site::GenKind::Transvection && g.kind != site::GenKind::Dilation) continue;
            if (static_cast<int>(g.dst) != n) continue;
            const ActTable& t = x.gen_action(id);
            for (auto i : f.regular[n])
                if (!std::binary_search(f.regular[n].begin(), f.regular[n].end(), t[i]))
                    return false;
        }
    }
    return true;
}

// -------------------------------------------------------------- EndSetTable

std::string EndSetTable::serialize() const {
    std::ostringstream os;
    os << "n=" << n << " size=" << size << "\n";
    for (std::size_t k = 0; k < act.size(); ++k) {
        for (std::uint32_t z = 0; z < size; ++z) {
            if (z) os << ' ';
            os << act[k][z];
        }
        os << "\n";
    }
    return os.str();
}

EndSetTable EndSetTable::parse(const std::string& text) {
    EndSetTable t;
    std::istringstream is(text);
    std::string header;
    if (!std::getline(is, header)) throw UsageError("EndSetTable: empty input");
    if (std::sscanf(header.c_str(), "n=%u size=%u", &t.n, &t.size) != 2)
        throw UsageError("EndSetTable: bad header '" + header + "'");
    std::uint64_t lines = fp::pow_u64(fp::prime(), t.n * t.n);
    t.act.assign(lines, std::vector<std::uint32_t>(t.size));
    std::string line;
    for (std::uint64_t k = 0; k < lines; ++k) {
        if (!std::getline(is, line)) throw UsageError("EndSetTable: truncated at line " + std::to_string(k + 2));
        std::istringstream ls(line);
        for (std::uint32_t z = 0; z < t.size; ++z) {
            std::uint32_t v;
            if (!(ls >> v) || v >= t.size)
                throw UsageError("EndSetTable: bad entry at line " + std::to_string(k + 2));
            t.act[k][z] = v;
        }
        std::uint32_t extra;
        if (ls >> extra) throw UsageError("EndSetTable: extra entries at line " + std::to_string(k + 2));
    }
    return t;
}

EndSetTable EndSetTable::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open EndSetTable file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void EndSetTable::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write EndSetTable file " + path);
    out << serialize();
}

std::string EndSetTable::validate(std::uint64_t cap, std::uint64_t seed) const {
    std::uint64_t m = act.size();
    FpMatrix id_m = FpMatrix::identity(n);
    std::uint64_t id_idx = id_m.to_index();
    for (std::uint32_t z = 0; z < size; ++z)
        if (act[id_idx][z] != z) return "identity action moves element " + std::to_string(z);
    auto check_pair = [&](std::uint64_t kf, std::uint64_t kg) -> bool {
        FpMatrix f = FpMatrix::from_index(n, n, kf);
        FpMatrix g = FpMatrix::from_index(n, n, kg);
        std::uint64_t kfg = f.mul(g).to_index();
        for (std::uint32_t z = 0; z < size; ++z)
            if (act[kg][act[kf][z]] != act[kfg][z]) return false;
        return true;
    };
    if (m <= 1 || m * m <= cap) {
        for (std::uint64_t kf = 0; kf < m; ++kf)
            for (std::uint64_t kg = 0; kg < m; ++kg)
                if (!check_pair(kf, kg))
                    return "right-action law fails at (" + std::to_string(kf) + "," + std::to_string(kg) + ")";
    } else {
        std::mt19937_64 rng(seed ^ 0xda3e39cb94b95bdbull);
        for (int t = 0; t < 4096; ++t) {
            std::uint64_t kf = rng() % m, kg = rng() % m;
            if (!check_pair(kf, kg))
                return "right-action law fails at (" + std::to_string(kf) + "," + std::to_string(kg) + ")";
        }
    }
    return {};
}

std::vector<FpMatrix> end_monoid_generators(const TruncatedSite& site, std::uint32_t n) {
    std::vector<FpMatrix> gens;
    for (const auto& g : site.generators())
        if (g.src == n && g.dst == n) gens.push_back(g.mat);
    if (n >= 1) {
        FpMatrix e = FpMatrix::identity(n);
        e.set(n - 1, n - 1, 0);
        gens.push_back(std::move(e)); // rank-deficient idempotent
    }
    return gens;
}

SetPresheaf induced(std::shared_ptr<const TruncatedSite> site, const EndSetTable& z, std::uint64_t cap) {
    if (static_cast<int>(z.n) > site->window()) throw WindowExceeded("induced presheaf at n beyond window");
    int w = site->window();
    std::vector<FpMatrix> endo_gens = end_monoid_generators(*site, z.n);
    std::vector<std::uint64_t> endo_idx;
    for (const auto& f : endo_gens) endo_idx.push_back(f.to_index());

    std::vector<std::uint32_t> sizes(w + 1);
    std::vector<std::vector<std::uint32_t>> cls(w + 1);   // item -> class id
    std::vector<std::vector<std::uint32_t>> rep(w + 1);   // class id -> canonical item
    for (int d = 0; d <= w; ++d) {
        std::uint64_t h = linalg::hom_count(d, z.n);
        std::uint64_t items = h * z.size;
        if (items > cap) throw CapExceeded("induced presheaf sections at dimension " + std::to_string(d));
        Dsu dsu(static_cast<std::uint32_t>(items));
        std::vector<FpMatrix> homs;
        homs.reserve(h);
        for (std::uint64_t k = 0; k < h; ++k) homs.push_back(FpMatrix::from_index(d, z.n, k));
        for (std::size_t gi = 0; gi < endo_gens.size(); ++gi) {
            for (std::uint64_t k = 0; k < h; ++k) {
                std::uint64_t fg = endo_gens[gi].mul(homs[k]).to_index();
                for (std::uint32_t zz = 0; zz < z.size; ++zz) {
                    std::uint32_t zf = z.apply(zz, endo_idx[gi]);
                    // (z.f, g) ~ (z, f o g)
                    dsu.unite(static_cast<std::uint32_t>(zf * h + k),
                              static_cast<std::uint32_t>(zz * h + fg));
                }
            }
        }
        cls[d].assign(items, UINT32_MAX);
        for (std::uint64_t i = 0; i < items; ++i) {
            std::uint32_t root = dsu.find(static_cast<std::uint32_t>(i));
            if (cls[d][root] == UINT32_MAX) {
                cls[d][root] = static_cast<std::uint32_t>(rep[d].size());
                rep[d].push_back(static_cast<std::uint32_t>(i)); // min item of its class
            }
            cls[d][i] = cls[d][root];
        }
        sizes[d] = static_cast<std::uint32_t>(rep[d].size());
    }

    std::vector<ActTable> acts(site->generators().size());
    for (std::uint32_t id = 0; id < acts.size(); ++id) {
        const auto& g = site->gen(id);
        std::uint64_t h_src = linalg::hom_count(g.src, z.n);
        std::uint64_t h_dst = linalg::hom_count(g.dst, z.n);
        ActTable t(sizes[g.dst]);
        for (std::uint32_t c = 0; c < sizes[g.dst]; ++c) {
            std::uint64_t item = rep[g.dst][c];
            std::uint32_t zz = static_cast<std::uint32_t>(item / h_dst);
            std::uint64_t k = item % h_dst;
            std::uint64_t gk = FpMatrix::from_index(g.dst, z.n, k).mul(g.mat).to_index();
            t[c] = cls[g.src][zz * h_src + gk];
        }
        acts[id] = std::move(t);
    }
    return SetPresheaf(std::move(site), "induced(n=" + std::to_string(z.n) + ")", std::move(sizes),
                       std::move(acts));
}

// -------------------------------------------------------------- morphisms

void check_natural(const PresheafMorphism& f) {
    const SetPresheaf& x = *f.src;
    const SetPresheaf& y = *f.tgt;
    if (x.site() != y.site()) throw NaturalityViolation("sites differ");
    for (std::uint32_t id = 0; id < x.site()->generators().size(); ++id) {
        const auto& g = x.site()->gen(id);
        const ActTable& tx = x.gen_action(id);
        const ActTable& ty = y.gen_action(id);
        for (std::uint32_t i = 0; i < x.size(g.dst); ++i)
            if (f.comp[g.src][tx[i]] != ty[f.comp[g.dst][i]])
                throw NaturalityViolation("square fails at generator " + g.label + ", section " +
                                          std::to_string(i));
    }
}

MonoResult mono_test(const PresheafMorphism& f) {
    check_natural(f);
    const SetPresheaf& x = *f.src;
    const SetPresheaf& y = *f.tgt;
    int w = x.window();
    RankFiltration fx = rank_filtration(x);
    if (auto nb = fx.bounded_rank()) {
        int n = *nb;
        std::vector<bool> seen(y.size(n), false);
        for (std::uint32_t i = 0; i < x.size(n); ++i) {
            std::uint32_t j = f.comp[n][i];
            if (seen[j])
                return {false, "collision at dimension " + std::to_string(n) + " (bounded criterion)"};
            seen[j] = true;
        }
        return {true, "injective at dimension " + std::to_string(n) + " with X = X_{<=" +
                          std::to_string(n) + "}"};
    }
    RankFiltration fy = rank_filtration(y);
    for (int k = 0; k <= w; ++k) {
        std::vector<bool> seen(y.size(k), false);
        for (auto i : fx.regular[k]) {
            std::uint32_t j = f.comp[k][i];
            if (!std::binary_search(fy.regular[k].begin(), fy.regular[k].end(), j))
                return {false, "regular section maps to a non-regular one at dimension " +
                                   std::to_string(k)};
            if (seen[j]) return {false, "collision on regular sections at dimension " + std::to_string(k)};
            seen[j] = true;
        }
    }
    return {true, "injective on regular sections at all window dimensions"};
}

} // namespace fpre::presheaf

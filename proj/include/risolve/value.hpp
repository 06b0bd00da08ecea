#pragma once

#include "risolve/term.hpp"

#include <algorithm>

// Ground values: integers, constants, pairs and finite sets. Set values may
// contain set values (the nested-empty-set valuations produced by model
// extraction live here), even though set *terms* only hold X-sorted elements.

namespace risolve {

struct value;
using vref = std::shared_ptr<const value>;

enum class vkind { num, cst, pairv, setv };

struct value {
    vkind kind;
    long long n = 0;
    std::string name;
    vref a, b;                 // pair
    std::vector<vref> elems;   // set, canonically sorted, duplicate-free
};

int value_cmp(const vref& x, const vref& y);

inline vref mk_vnum(long long n) {
    auto v = std::make_shared<value>();
    v->kind = vkind::num;
    v->n = n;
    return v;
}

inline vref mk_vcst(std::string s) {
    auto v = std::make_shared<value>();
    v->kind = vkind::cst;
    v->name = std::move(s);
    return v;
}

inline vref mk_vpair(vref a, vref b) {
    auto v = std::make_shared<value>();
    v->kind = vkind::pairv;
    v->a = std::move(a);
    v->b = std::move(b);
    return v;
}

inline vref mk_vset(std::vector<vref> elems) {
    std::sort(elems.begin(), elems.end(),
              [](const vref& x, const vref& y) { return value_cmp(x, y) < 0; });
    elems.erase(std::unique(elems.begin(), elems.end(),
                            [](const vref& x, const vref& y) { return value_cmp(x, y) == 0; }),
                elems.end());
    auto v = std::make_shared<value>();
    v->kind = vkind::setv;
    v->elems = std::move(elems);
    return v;
}

inline vref mk_vempty() { return mk_vset({}); }

inline int value_cmp(const vref& x, const vref& y) {
    if (x == y)
        return 0;
    if (x->kind != y->kind)
        return static_cast<int>(x->kind) < static_cast<int>(y->kind) ? -1 : 1;
    switch (x->kind) {
    case vkind::num:
        return x->n < y->n ? -1 : (x->n > y->n ? 1 : 0);
    case vkind::cst:
        return x->name.compare(y->name) < 0 ? -1 : (x->name == y->name ? 0 : 1);
    case vkind::pairv: {
        int c = value_cmp(x->a, y->a);
        return c != 0 ? c : value_cmp(x->b, y->b);
    }
    case vkind::setv: {
        if (x->elems.size() != y->elems.size())
            return x->elems.size() < y->elems.size() ? -1 : 1;
        for (size_t i = 0; i < x->elems.size(); ++i) {
            int c = value_cmp(x->elems[i], y->elems[i]);
            if (c != 0)
                return c;
        }
        return 0;
    }
    }
    return 0;
}

inline bool value_eq(const vref& x, const vref& y) { return value_cmp(x, y) == 0; }

inline bool set_contains(const vref& s, const vref& e) {
    for (auto& m : s->elems)
        if (value_eq(m, e))
            return true;
    return false;
}

inline vref set_union(const vref& a, const vref& b) {
    std::vector<vref> es = a->elems;
    es.insert(es.end(), b->elems.begin(), b->elems.end());
    return mk_vset(std::move(es));
}

inline bool sets_disjoint(const vref& a, const vref& b) {
    for (auto& e : a->elems)
        if (set_contains(b, e))
            return false;
    return true;
}

inline bool set_subset(const vref& a, const vref& b) {
    for (auto& e : a->elems)
        if (!set_contains(b, e))
            return false;
    return true;
}

inline vref set_inter(const vref& a, const vref& b) {
    std::vector<vref> es;
    for (auto& e : a->elems)
        if (set_contains(b, e))
            es.push_back(e);
    return mk_vset(std::move(es));
}

inline vref set_diff(const vref& a, const vref& b) {
    std::vector<vref> es;
    for (auto& e : a->elems)
        if (!set_contains(b, e))
            es.push_back(e);
    return mk_vset(std::move(es));
}

// total ground assignment for evaluation
struct env {
    std::map<std::string, vref> xvals;
    std::map<std::string, vref> svals;
};

inline std::string value_str(const vref& v) {
    switch (v->kind) {
    case vkind::num:
        return std::to_string(v->n);
    case vkind::cst:
        return v->name;
    case vkind::pairv:
        return "[" + value_str(v->a) + "," + value_str(v->b) + "]";
    case vkind::setv: {
        std::string out = "{";
        for (size_t i = 0; i < v->elems.size(); ++i) {
            if (i)
                out += ",";
            out += value_str(v->elems[i]);
        }
        return out + "}";
    }
    }
    return "?";
}

}  // namespace risolve

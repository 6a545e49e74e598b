#pragma once

#include <bouss/exec.hpp>
#include <bouss/field.hpp>
#include <bouss/grid.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace bouss {

struct HolderOptions {
    std::uint64_t seed = 20240611;
    std::size_t exhaustive_limit = 10000;  // all node pairs up to this many nodes
    int anchors = 4096;                    // stratified anchors beyond the limit
    int local_radius = 3;                  // every node also pairs with neighbours this close
    Exec exec = Exec::Parallel;
};

struct HolderReport {
    int m = 0;
    double alpha = 0.5;
    double sup_norm = 0.0;           // max |f| over nodes (and components)
    std::vector<double> sups;        // sup of every derivative of order <= m
    std::vector<double> seminorms;   // Hoelder quotients of the order-m derivatives
    double total = 0.0;
    std::string csv_row(const std::string& run_id, int slab) const;
    static std::string csv_header();
};

// max over node pairs (x != y) of |f(x)-f(y)| / |x-y|^alpha.
double pair_seminorm(const ScalarField& f, double alpha, const HolderOptions& opt = {});

HolderReport holder_norm(const ScalarField& f, int m, double alpha = 0.5, const HolderOptions& opt = {});
HolderReport holder_norm(const VectorField& f, int m, double alpha = 0.5, const HolderOptions& opt = {});

double time_sup_norm(const std::vector<ScalarField>& hist, int m, double alpha = 0.5,
                     const HolderOptions& opt = {});
double time_sup_norm(const std::vector<VectorField>& hist, int m, double alpha = 0.5,
                     const HolderOptions& opt = {});

struct GronwallVerdict {
    bool holds = false;
    double lhs = 0.0;     // max_t ||u(t)||
    double source = 0.0;  // integral of ||g|| plus ||u(0)||
    double speed = 0.0;   // integral of ||v||
    double rhs = 0.0;     // source * exp(K * speed)
    double margin = 0.0;  // rhs - lhs
    double K_min = 0.0;   // smallest K for which the bound holds (inf if none)
};

// Checks max_t ||u|| <= (int ||g|| dt + ||u(0)||) exp(K int ||v|| dt) in the (m,alpha)
// surrogate norm. Histories are sampled at the nodes of tg; g may be empty (zero source).
GronwallVerdict check_gronwall_bound(const std::vector<ScalarField>& u, const std::vector<ScalarField>& g,
                                     const std::vector<VectorField>& v, const TimeGrid& tg, int m,
                                     double alpha, double K, const HolderOptions& opt = {});

} // namespace bouss

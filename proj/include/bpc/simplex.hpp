#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "bpc/model.hpp"

namespace bpc {

// Regular discretization of the belief simplex with step 1/resolution.
// Points are the integer compositions (t_0..t_N) of the resolution k,
// ordered so that rows of constant (t_2..t_N) are contiguous with t_1
// varying fastest.
class SimplexGrid {
  public:
    static constexpr size_t kDefaultCapacity = 50'000'000;

    SimplexGrid(int n_causes, int resolution, size_t max_points = kDefaultCapacity);

    int n_causes() const { return n_causes_; }
    int n_states() const { return n_causes_ + 1; }
    int resolution() const { return resolution_; }
    size_t size() const { return static_cast<size_t>(n_points_); }

    // Integer coordinates (t_0..t_N) of a grid point.
    const int* tuple(int index) const { return &tuples_[static_cast<size_t>(index) * n_states()]; }
    Belief point(int index) const;
    int index_of(const int* tuple) const;

    // Row structure for the accelerated sweep: a row fixes (t_2..t_N) and
    // spans its points in increasing t_1.
    int n_rows() const { return static_cast<int>(row_starts_.size()) - 1; }
    int row_begin(int row) const { return row_starts_[row]; }
    int row_end(int row) const { return row_starts_[row + 1]; }

    struct Cell {
        int count = 0;
        std::array<int, 8> indices{};
        std::array<double, 8> weights{};
    };

    // Barycentric coordinates of a belief in the Freudenthal triangulation.
    // Weights are nonnegative, sum to one, and reproduce the belief exactly.
    Cell locate(const Belief& belief) const;

  private:
    uint64_t pack(const int* t) const;

    int n_causes_;
    int resolution_;
    int n_points_ = 0;
    std::vector<int> tuples_;
    std::vector<int> row_starts_;
    std::unordered_map<uint64_t, int> lookup_;
};

struct ValueField {
    const SimplexGrid* grid = nullptr;
    Vec values;

    explicit ValueField(const SimplexGrid& g, double fill = 0.0)
        : grid(&g), values(g.size(), fill) {}
};

SimplexGrid build_grid(int n_causes, int resolution, size_t max_points = SimplexGrid::kDefaultCapacity);

double interpolate(const ValueField& field, const Belief& belief);

// Clamps tiny negative components from floating-point noise and renormalizes.
// Components below -1e-10 are treated as genuinely invalid.
Belief sanitize_belief(const Belief& belief);

}  // namespace bpc

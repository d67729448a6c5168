#include "bpc/simplex.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace bpc {

SimplexGrid::SimplexGrid(int n_causes, int resolution, size_t max_points)
    : n_causes_(n_causes), resolution_(resolution) {
    if (n_causes < 1) throw ValidationError("build_grid: n_causes must be at least 1");
    if (resolution < 1) throw ValidationError("build_grid: resolution must be at least 1");
    const int s = n_states();
    if (s > 8) throw CapacityError("build_grid: at most 7 assignable causes are supported");
    const unsigned bits = std::bit_width(static_cast<unsigned>(resolution));
    if (static_cast<unsigned>(s) * bits > 64)
        throw CapacityError("build_grid: tuple does not fit the 64-bit index key");

    // C(N+k, N) points.
    double count = 1.0;
    for (int i = 1; i <= n_causes; ++i) count *= static_cast<double>(resolution + i) / i;
    if (count > static_cast<double>(max_points))
        throw CapacityError("build_grid: grid would need " + std::to_string(static_cast<size_t>(count)) +
                            " points, above the cap of " + std::to_string(max_points));

    // Enumerate with t_1 varying fastest so rows of constant (t_2..t_N)
    // are contiguous; outer coordinates advance odometer-style.
    std::vector<int> outer(s, 0);  // outer[2..N] in use
    const int k = resolution;
    while (true) {
        int outer_sum = 0;
        for (int j = 2; j < s; ++j) outer_sum += outer[j];
        if (outer_sum <= k) {
            row_starts_.push_back(n_points_);
            for (int t1 = 0; t1 + outer_sum <= k; ++t1) {
                tuples_.push_back(k - outer_sum - t1);
                tuples_.push_back(t1);
                for (int j = 2; j < s; ++j) tuples_.push_back(outer[j]);
                ++n_points_;
            }
        }
        // Advance (t_2..t_N).
        int j = 2;
        while (j < s) {
            int rest = 0;
            for (int l = j + 1; l < s; ++l) rest += outer[l];
            if (outer[j] + rest < k) {
                ++outer[j];
                break;
            }
            outer[j] = 0;
            ++j;
        }
        if (j >= s) break;
    }
    row_starts_.push_back(n_points_);

    lookup_.reserve(static_cast<size_t>(n_points_) * 2);
    for (int i = 0; i < n_points_; ++i) lookup_.emplace(pack(tuple(i)), i);
}

uint64_t SimplexGrid::pack(const int* t) const {
    const unsigned bits = std::bit_width(static_cast<unsigned>(resolution_));
    uint64_t key = 0;
    for (int j = 0; j < n_states(); ++j) key = (key << bits) | static_cast<uint64_t>(t[j]);
    return key;
}

Belief SimplexGrid::point(int index) const {
    Belief b;
    b.p.resize(n_states());
    const int* t = tuple(index);
    for (int j = 0; j < n_states(); ++j) b.p[j] = static_cast<double>(t[j]) / resolution_;
    return b;
}

int SimplexGrid::index_of(const int* t) const {
    const auto it = lookup_.find(pack(t));
    if (it == lookup_.end()) throw NumericalError("SimplexGrid: tuple is not a grid point");
    return it->second;
}

Belief sanitize_belief(const Belief& belief) {
    Belief b = belief;
    double sum = 0.0;
    for (double& v : b.p) {
        if (v < 0.0) {
            if (v < -1e-10) throw ValidationError("belief: negative component beyond noise tolerance");
            v = 0.0;
        }
        sum += v;
    }
    if (!(sum > 0.0)) throw ValidationError("belief: components sum to zero");
    for (double& v : b.p) v /= sum;
    return b;
}

SimplexGrid::Cell SimplexGrid::locate(const Belief& raw) const {
    const Belief belief = sanitize_belief(raw);
    const int s = n_states();
    const int n = n_causes_;
    const int k = resolution_;

    // Freudenthal triangulation in cumulative coordinates y_j = k * sum_{l>=j} pi_l.
    std::array<double, 8> y{};
    std::array<int, 8> base{};
    std::array<double, 8> frac{};
    double tail = 0.0;
    for (int j = s - 1; j >= 1; --j) {
        tail += belief.p[j];
        y[j] = k * tail;
    }
    // Floating-point summation can break the y_1 >= y_2 >= ... >= y_n >= 0
    // ordering (or push y_1 past k) by an ulp, which would yield tuples with
    // negative occupancies below. Restore monotonicity explicitly.
    if (y[1] > k) y[1] = k;
    for (int j = 2; j <= n; ++j)
        if (y[j] > y[j - 1]) y[j] = y[j - 1];
    for (int j = 1; j <= n; ++j) {
        double v = std::floor(y[j]);
        if (v > y[j]) v -= 1.0;  // guard against floor(x) > x on noisy input
        if (v < 0.0) v = 0.0;
        if (v > k) v = k;
        base[j] = static_cast<int>(v);
        frac[j] = y[j] - v;
        if (frac[j] < 0.0) frac[j] = 0.0;
        if (frac[j] > 1.0) frac[j] = 1.0;
    }

    // Sort coordinates by descending fractional part, ties by index, so the
    // incremented cumulative coordinates stay monotone.
    std::array<int, 8> order{};
    for (int j = 0; j < n; ++j) order[j] = j + 1;
    std::sort(order.begin(), order.begin() + n, [&](int a, int b) {
        if (frac[a] != frac[b]) return frac[a] > frac[b];
        return a < b;
    });

    Cell cell;
    std::array<int, 8> u{};
    std::array<int, 8> t{};
    for (int j = 1; j <= n; ++j) u[j] = base[j];
    for (int m = 0; m <= n; ++m) {
        double w;
        if (m == 0)
            w = 1.0 - (n > 0 ? frac[order[0]] : 0.0);
        else if (m < n)
            w = frac[order[m - 1]] - frac[order[m]];
        else
            w = frac[order[n - 1]];
        if (m > 0) ++u[order[m - 1]];
        if (w <= 0.0) continue;
        // Back to occupancy coordinates.
        t[s - 1] = u[s - 1];
        for (int j = 1; j < s - 1; ++j) t[j] = u[j] - u[j + 1];
        t[0] = k - u[1];
        cell.indices[cell.count] = index_of(t.data());
        cell.weights[cell.count] = w;
        ++cell.count;
    }
    return cell;
}

SimplexGrid build_grid(int n_causes, int resolution, size_t max_points) {
    return SimplexGrid(n_causes, resolution, max_points);
}

double interpolate(const ValueField& field, const Belief& belief) {
    const SimplexGrid::Cell cell = field.grid->locate(belief);
    double v = 0.0;
    for (int i = 0; i < cell.count; ++i) v += cell.weights[i] * field.values[cell.indices[i]];
    return v;
}

}  // namespace bpc

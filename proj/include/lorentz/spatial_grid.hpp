#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lorentz/geometry.hpp"

namespace lorentz {

/// Uniform hash grid mapping cubic cells to lists of integer ids.
///
/// Balls are registered in every cell their bounding box touches; segments in
/// every cell they traverse (3D DDA). A segment query therefore sees every ball
/// it intersects, and a ball query sees every segment passing through the ball.
/// Ids may be reported more than once; callers deduplicate if they care.
class SpatialGrid {
public:
    explicit SpatialGrid(double cell_size = 1.0);

    double cell_size() const { return cell_; }
    void clear();
    std::size_t entry_count() const { return entries_.size(); }

    void insert_box(int id, const Vec3& lo, const Vec3& hi);
    void insert_ball(int id, const Vec3& c, double radius) { insert_box(id, c - Vec3{radius, radius, radius}, c + Vec3{radius, radius, radius}); }
    void insert_segment(int id, const Vec3& a, const Vec3& b);

    /// Calls f(id) for ids in cells overlapping the box.
    template <class F>
    void visit_box(const Vec3& lo, const Vec3& hi, F&& f) const
    {
        const auto a = cell_of(lo);
        const auto b = cell_of(hi);
        for (std::int64_t i = a[0]; i <= b[0]; ++i) {
            for (std::int64_t j = a[1]; j <= b[1]; ++j) {
                for (std::int64_t k = a[2]; k <= b[2]; ++k) {
                    visit_cell({i, j, k}, f);
                }
            }
        }
    }

    template <class F>
    void visit_ball(const Vec3& c, double radius, F&& f) const
    {
        visit_box(c - Vec3{radius, radius, radius}, c + Vec3{radius, radius, radius}, f);
    }

    /// Calls f(id) for ids in cells traversed by the segment [a, b].
    template <class F>
    void visit_segment(const Vec3& a, const Vec3& b, F&& f) const
    {
        traverse(a, b, [&](const std::array<std::int64_t, 3>& cell) { visit_cell(cell, f); });
    }

private:
    struct Entry {
        int id;
        int next;
    };
    struct Slot {
        std::uint64_t key;
        int head;  // -1 when empty
    };

    std::array<std::int64_t, 3> cell_of(const Vec3& p) const;
    static std::uint64_t key_of(const std::array<std::int64_t, 3>& c);
    std::size_t find_slot(std::uint64_t key) const;
    void add(const std::array<std::int64_t, 3>& cell, int id);
    void grow();

    template <class F>
    void visit_cell(const std::array<std::int64_t, 3>& cell, F& f) const
    {
        if (used_.empty()) {
            return;
        }
        const std::size_t s = find_slot(key_of(cell));
        for (int e = slots_[s].head; e >= 0; e = entries_[static_cast<std::size_t>(e)].next) {
            f(entries_[static_cast<std::size_t>(e)].id);
        }
    }

    template <class F>
    void traverse(const Vec3& a, const Vec3& b, F&& f) const;

    double cell_;
    double inv_cell_;
    std::vector<Slot> slots_;
    std::vector<std::size_t> used_;
    std::vector<Entry> entries_;
};

template <class F>
void SpatialGrid::traverse(const Vec3& a, const Vec3& b, F&& f) const
{
    auto cell = cell_of(a);
    const auto last = cell_of(b);
    const Vec3 d = b - a;
    std::array<std::int64_t, 3> step{};
    std::array<double, 3> t_next{};
    std::array<double, 3> t_delta{};
    constexpr double kInf = 1e300;
    for (int ax = 0; ax < 3; ++ax) {
        const double da = d[ax];
        const double pa = a[ax] * inv_cell_;
        if (da > 0.0) {
            step[ax] = 1;
            t_delta[ax] = cell_ / da;
            t_next[ax] = (static_cast<double>(cell[ax] + 1) - pa) * cell_ / da;
        } else if (da < 0.0) {
            step[ax] = -1;
            t_delta[ax] = -cell_ / da;
            t_next[ax] = (pa - static_cast<double>(cell[ax])) * cell_ / -da;
        } else {
            step[ax] = 0;
            t_delta[ax] = kInf;
            t_next[ax] = kInf;
        }
    }
    // the number of cells is bounded by the Manhattan distance between end cells
    std::int64_t budget = 1;
    for (int ax = 0; ax < 3; ++ax) {
        budget += std::abs(last[ax] - cell[ax]);
    }
    for (std::int64_t n = 0; n < budget; ++n) {
        f(cell);
        if (cell == last) {
            return;
        }
        int ax = 0;
        if (t_next[1] < t_next[ax]) {
            ax = 1;
        }
        if (t_next[2] < t_next[ax]) {
            ax = 2;
        }
        if (t_next[ax] > 1.0 + 1e-12 || step[ax] == 0) {
            break;
        }
        cell[static_cast<std::size_t>(ax)] += step[ax];
        t_next[ax] += t_delta[ax];
    }
    // rounding may leave the walk one cell short of the end cell
    if (cell != last) {
        f(last);
    }
}

}  // namespace lorentz

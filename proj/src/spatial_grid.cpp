#include "lorentz/spatial_grid.hpp"

#include <cmath>

#include "lorentz/rng.hpp"

namespace lorentz {

SpatialGrid::SpatialGrid(double cell_size) : cell_(cell_size), inv_cell_(1.0 / cell_size)
{
    if (!(cell_size > 0.0)) {
        throw std::invalid_argument("cell size must be positive");
    }
    slots_.assign(256, Slot{0, -1});
}

void SpatialGrid::clear()
{
    for (std::size_t s : used_) {
        slots_[s].head = -1;
    }
    used_.clear();
    entries_.clear();
}

std::array<std::int64_t, 3> SpatialGrid::cell_of(const Vec3& p) const
{
    return {static_cast<std::int64_t>(std::floor(p.x * inv_cell_)),
            static_cast<std::int64_t>(std::floor(p.y * inv_cell_)),
            static_cast<std::int64_t>(std::floor(p.z * inv_cell_))};
}

std::uint64_t SpatialGrid::key_of(const std::array<std::int64_t, 3>& c)
{
    constexpr std::uint64_t mask = (1ULL << 21) - 1;
    return ((static_cast<std::uint64_t>(c[0]) & mask) << 42) | ((static_cast<std::uint64_t>(c[1]) & mask) << 21)
           | (static_cast<std::uint64_t>(c[2]) & mask);
}

std::size_t SpatialGrid::find_slot(std::uint64_t key) const
{
    const std::size_t mask = slots_.size() - 1;
    std::size_t s = static_cast<std::size_t>(splitmix64(key)) & mask;
    while (slots_[s].head >= 0 && slots_[s].key != key) {
        s = (s + 1) & mask;
    }
    return s;
}

void SpatialGrid::grow()
{
    std::vector<Slot> old;
    old.swap(slots_);
    slots_.assign(old.size() * 2, Slot{0, -1});
    std::vector<std::size_t> old_used;
    old_used.swap(used_);
    for (std::size_t s : old_used) {
        const std::size_t t = find_slot(old[s].key);
        slots_[t] = old[s];
        used_.push_back(t);
    }
}

void SpatialGrid::add(const std::array<std::int64_t, 3>& cell, int id)
{
    if (2 * (used_.size() + 1) > slots_.size()) {
        grow();
    }
    const std::uint64_t key = key_of(cell);
    const std::size_t s = find_slot(key);
    if (slots_[s].head < 0) {
        slots_[s].key = key;
        used_.push_back(s);
    }
    entries_.push_back({id, slots_[s].head});
    slots_[s].head = static_cast<int>(entries_.size() - 1);
}

void SpatialGrid::insert_box(int id, const Vec3& lo, const Vec3& hi)
{
    const auto a = cell_of(lo);
    const auto b = cell_of(hi);
    for (std::int64_t i = a[0]; i <= b[0]; ++i) {
        for (std::int64_t j = a[1]; j <= b[1]; ++j) {
            for (std::int64_t k = a[2]; k <= b[2]; ++k) {
                add({i, j, k}, id);
            }
        }
    }
}

void SpatialGrid::insert_segment(int id, const Vec3& a, const Vec3& b)
{
    traverse(a, b, [&](const std::array<std::int64_t, 3>& cell) { add(cell, id); });
}

}  // namespace lorentz

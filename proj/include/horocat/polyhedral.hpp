#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "horocat/forms.hpp"
#include "horocat/rational.hpp"

namespace horocat {

inline Integer dot(const IntVector& a, const IntVector& b) {
    Integer acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline Rational dot(const IntVector& a, const RatVector& b) {
    Rational acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += Rational(a[i]) * b[i];
    return acc;
}

/// Fixed-width bitset over constraint indices, grown on demand.
class IncidenceSet {
public:
    void set(std::size_t i) {
        if (i / 64 >= words_.size()) words_.resize(i / 64 + 1, 0);
        words_[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    bool test(std::size_t i) const { return i / 64 < words_.size() && (words_[i / 64] >> (i % 64)) & 1; }
    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
        return c;
    }
    IncidenceSet operator&(const IncidenceSet& o) const {
        IncidenceSet r;
        r.words_.resize(std::min(words_.size(), o.words_.size()));
        for (std::size_t i = 0; i < r.words_.size(); ++i) r.words_[i] = words_[i] & o.words_[i];
        return r;
    }
    bool subset_of(const IncidenceSet& o) const {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            const std::uint64_t other = i < o.words_.size() ? o.words_[i] : 0;
            if (words_[i] & ~other) return false;
        }
        return true;
    }

private:
    std::vector<std::uint64_t> words_;
};

// PolyhedralCone
// ~~~~~~~~~~~~~~
/// Pointed polyhedral cone {x : l_k . x >= 0} kept in double description: the
/// constraint list and the extreme rays (primitive integer vectors) with their
/// incidences. Constraints are added one at a time; redundant ones are dropped.
class PolyhedralCone {
public:
    /// The simplicial cone spanned by linearly independent rays.
    static PolyhedralCone simplicial(const std::vector<IntVector>& rays) {
        PolyhedralCone c;
        c.dim_ = rays.size();
        RatMatrix v(c.dim_, c.dim_);
        for (std::size_t i = 0; i < c.dim_; ++i)
            for (std::size_t j = 0; j < c.dim_; ++j) v(i, j) = rays[j][i];
        const RatMatrix inv = inverse(v);
        for (std::size_t i = 0; i < c.dim_; ++i) {
            RatVector row(c.dim_);
            for (std::size_t j = 0; j < c.dim_; ++j) row[j] = inv(i, j);
            c.constraints_.push_back(primitive(row));
            c.tags_.push_back(kArtificial);
        }
        for (std::size_t j = 0; j < c.dim_; ++j) {
            IncidenceSet z;
            for (std::size_t i = 0; i < c.dim_; ++i)
                if (i != j) z.set(i);
            c.rays_.push_back(primitive(rays[j]));
            c.incidence_.push_back(z);
        }
        return c;
    }

    static constexpr long kArtificial = -1;

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<IntVector>& rays() const noexcept { return rays_; }
    const std::vector<IntVector>& constraints() const noexcept { return constraints_; }
    long tag(std::size_t constraint) const { return tags_[constraint]; }
    bool tight(std::size_t ray, std::size_t constraint) const { return incidence_[ray].test(constraint); }

    /// Intersects with {functional . x >= 0}. Returns false (and leaves the cone
    /// unchanged) when the constraint is redundant.
    bool add(const IntVector& functional, long tag) {
        std::vector<Integer> value(rays_.size());
        bool cuts = false;
        for (std::size_t i = 0; i < rays_.size(); ++i) {
            value[i] = dot(functional, rays_[i]);
            if (value[i] < 0) cuts = true;
        }
        if (!cuts) return false;
        const std::size_t index = constraints_.size();
        std::vector<IntVector> rays;
        std::vector<IncidenceSet> incidence;
        for (std::size_t i = 0; i < rays_.size(); ++i) {
            if (value[i] < 0) continue;
            rays.push_back(rays_[i]);
            incidence.push_back(incidence_[i]);
            if (value[i] == 0) incidence.back().set(index);
        }
        for (std::size_t p = 0; p < rays_.size(); ++p) {
            if (value[p] <= 0) continue;
            for (std::size_t n = 0; n < rays_.size(); ++n) {
                if (value[n] >= 0 || !adjacent(p, n)) continue;
                IntVector r(dim_);
                for (std::size_t k = 0; k < dim_; ++k) r[k] = value[p] * rays_[n][k] - value[n] * rays_[p][k];
                IncidenceSet z = incidence_[p] & incidence_[n];
                z.set(index);
                rays.push_back(primitive(r));
                incidence.push_back(z);
            }
        }
        rays_ = std::move(rays);
        incidence_ = std::move(incidence);
        constraints_.push_back(functional);
        tags_.push_back(tag);
        return true;
    }

    /// Indices of rays tight on the constraint.
    std::vector<std::size_t> rays_on(std::size_t constraint) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < rays_.size(); ++i)
            if (incidence_[i].test(constraint)) out.push_back(i);
        return out;
    }

    /// Dimension of the face cut out by the constraint.
    std::size_t face_dimension(std::size_t constraint) const {
        std::vector<IntVector> rs;
        for (auto i : rays_on(constraint)) rs.push_back(rays_[i]);
        return rank(rs);
    }

    bool contains(const RatVector& x) const {
        for (const auto& l : constraints_)
            if (dot(l, x) < 0) return false;
        return true;
    }

    bool contains(const IntVector& x) const { return contains(to_rational(x)); }

    /// Vertex sets of all nonempty faces (each a sorted list of ray indices), from
    /// intersections of facet vertex sets, plus the whole cone.
    std::vector<std::vector<std::size_t>> faces() const {
        std::set<std::vector<std::size_t>> seen;
        std::vector<std::vector<std::size_t>> queue;
        std::vector<std::size_t> all(rays_.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        seen.insert(all);
        queue.push_back(all);
        std::vector<std::vector<std::size_t>> facets;
        for (std::size_t c = 0; c < constraints_.size(); ++c) {
            auto on = rays_on(c);
            if (!on.empty() && seen.insert(on).second) {
                queue.push_back(on);
                facets.push_back(on);
            }
        }
        for (std::size_t head = 1; head < queue.size(); ++head) {
            for (const auto& f : facets) {
                std::vector<std::size_t> meet;
                std::set_intersection(queue[head].begin(), queue[head].end(), f.begin(), f.end(), std::back_inserter(meet));
                if (!meet.empty() && seen.insert(meet).second) queue.push_back(meet);
            }
        }
        return queue;
    }

private:
    bool adjacent(std::size_t a, std::size_t b) const {
        const IncidenceSet z = incidence_[a] & incidence_[b];
        if (z.count() + 2 < dim_) return false;
        for (std::size_t k = 0; k < rays_.size(); ++k) {
            if (k == a || k == b) continue;
            if (z.subset_of(incidence_[k])) return false;
        }
        return true;
    }

    std::size_t dim_ = 0;
    std::vector<IntVector> constraints_;
    std::vector<long> tags_;
    std::vector<IntVector> rays_;
    std::vector<IncidenceSet> incidence_;
};

// Light-cone tests
// ~~~~~~~~~~~~~~~~
/// The point of span(rays) maximizing q on the slice <x, xi> = 1, i.e. the
/// q-orthogonal projection of xi onto the span. nullopt when q is degenerate there.
inline std::optional<RatVector> face_center(const QuadraticForm& form, const std::vector<IntVector>& rays,
                                            const RatVector& xi) {
    std::vector<RatVector> basis;
    for (const auto& r : rays) {
        std::vector<RatVector> trial = basis;
        trial.push_back(to_rational(r));
        if (rank(trial) > basis.size()) basis.push_back(to_rational(r));
    }
    const std::size_t k = basis.size();
    if (k == 0) return std::nullopt;
    RatMatrix gram(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) gram(i, j) = form.inner(basis[i], basis[j]);
    // Singular Gram matrices belong to subspaces tangent to the light cone.
    RatMatrix aug = gram;
    std::vector<RatVector> rows;
    for (std::size_t i = 0; i < k; ++i) {
        RatVector row(k);
        for (std::size_t j = 0; j < k; ++j) row[j] = gram(i, j);
        rows.push_back(row);
    }
    if (rank(rows) < k) return std::nullopt;
    RatVector rhs(k);
    for (std::size_t i = 0; i < k; ++i) rhs[i] = form.inner(basis[i], xi);
    const RatVector mu = inverse(aug) * rhs;
    RatVector c(xi.size(), Rational(0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < xi.size(); ++j) c[j] += mu[i] * basis[i][j];
    return c;
}

/// Whether the face with the given rays meets the open positive cone. The maximum of
/// q over a face on the slice is attained at the center of some subface, so it is
/// enough to test the centers of all subfaces.
inline bool face_meets_interior(const QuadraticForm& form, const PolyhedralCone& cone,
                                const std::vector<std::vector<std::size_t>>& faces, const RatVector& xi) {
    for (const auto& face : faces) {
        std::vector<IntVector> rs;
        for (auto i : face) rs.push_back(cone.rays()[i]);
        const auto c = face_center(form, rs, xi);
        if (!c) continue;
        if (form.q(*c) > 0 && form.inner(*c, xi) > 0 && cone.contains(*c)) return true;
    }
    return false;
}

/// Subfaces (vertex sets) of the face given by a sorted vertex set.
inline std::vector<std::vector<std::size_t>> subfaces(const std::vector<std::vector<std::size_t>>& all_faces,
                                                      const std::vector<std::size_t>& face) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& f : all_faces)
        if (std::includes(face.begin(), face.end(), f.begin(), f.end())) out.push_back(f);
    for (auto v : face) out.push_back({v});
    return out;
}

} // namespace horocat

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "horocat/coxeter.hpp"
#include "horocat/groups.hpp"
#include "horocat/isometries.hpp"

namespace horocat {

struct Preset {
    std::string name;
    std::string description;
    GeneratedGroup group;
    /// Lattice basepoint with trivial stabilizer, when the preset fixes one.
    std::optional<IntVector> basepoint;
};

inline std::vector<std::string> preset_names() {
    return {"modular",  "free2",    "cyclic-lox", "transverse-lox", "parabolic-pair", "torsion6", "coxeter3",
            "coxeter4", "coxeter5", "coxeter6",   "coxeter7",       "coxeter8"};
}

inline Preset make_preset(const std::string& name) {
    const QuadraticForm binary = binary_quadratic_form();
    if (name == "modular")
        return {name, "PSL2(Z) acting on binary quadratic forms; S: z -> -1/z, T: z -> z + 1",
                GeneratedGroup(binary, {symmetric_square(0, -1, 1, 0), symmetric_square(1, 1, 0, 1)}, {"S", "T"}),
                IntVector{4, 0, 1}};
    if (name == "free2")
        return {name, "free group on the images of [[5,3],[3,2]] and [[5,-3],[-3,2]]",
                GeneratedGroup(binary, {symmetric_square(5, 3, 3, 2), symmetric_square(5, -3, -3, 2)}), IntVector{1, 0, 1}};
    if (name == "cyclic-lox")
        return {name, "cyclic group generated by the image of [[2,1],[1,1]]",
                GeneratedGroup(binary, {symmetric_square(2, 1, 1, 1)}), IntVector{1, 0, 1}};
    if (name == "transverse-lox")
        return {name, "images of [[2,1],[1,1]] and its conjugate [[5,-11],[1,-2]] by [[2,-5],[1,-2]]",
                GeneratedGroup(binary, {symmetric_square(2, 1, 1, 1), symmetric_square(5, -11, 1, -2)}), IntVector{1, 0, 1}};
    if (name == "parabolic-pair")
        return {name, "images of [[1,3],[0,1]] and [[1,0],[3,1]], parabolics with distinct fixed points",
                GeneratedGroup(binary, {symmetric_square(1, 3, 0, 1), symmetric_square(1, 0, 3, 1)}), IntVector{2, 1, 3}};
    if (name == "torsion6") {
        const QuadraticForm form(IntMatrix{{1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}});
        return {name, "commuting elliptics of orders 2 and 3 fixing the origin of hyperbolic 3-space",
                GeneratedGroup(form, {IntMatrix{{1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}},
                                      IntMatrix{{1, 0, 0, 0}, {0, 0, 0, 1}, {0, 1, 0, 0}, {0, 0, 1, 0}}}),
                std::nullopt};
    }
    if (name.rfind("coxeter", 0) == 0 && name.size() == 8 && name[7] >= '3' && name[7] <= '8') {
        const std::size_t rank = static_cast<std::size_t>(name[7] - '0');
        const auto rep = build_rep(rank - 1);
        IntVector base(rank, Integer(1));
        return {name, "universal Coxeter group of rank " + std::to_string(rank) + " in its geometric representation",
                coxeter_group(rep), base};
    }
    fail(ErrorKind::ConfigError, "unknown preset '" + name + "'");
}

} // namespace horocat

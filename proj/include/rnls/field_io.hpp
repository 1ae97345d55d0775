#pragma once

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <type_traits>

#include "rnls/model.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// FieldFile: binary persistence of a Field plus its model provenance.
// Little-endian layout, version 1:
//   magic "RNLSF1\0\0" (8 bytes)
//   u32 version = 1
//   u8 dim
//   per axis: u64 n, f64 x_min, f64 x_max
//   f64 p, beta, Omega, omega
//   u8 potential tag (1 harmonic, 2 harmonic_lattice, 3 harmonic_quartic)
//   f64 coefficients (harmonic: dim, lattice: dim+1, quartic: 2)
//   n_total complex samples as interleaved (f64 re, f64 im), axis 0 fastest
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr char kFieldMagic[8] = {'R', 'N', 'L', 'S', 'F', '1', '\0', '\0'};

template <class T>
void write_le(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(buf, buf + sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) throw IoError("field file: truncated read");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

inline std::uint8_t potential_tag(const PotentialSpec& p) {
    switch (p.kind) {
        case PotentialSpec::Kind::harmonic: return 1;
        case PotentialSpec::Kind::harmonic_lattice: return 2;
        case PotentialSpec::Kind::harmonic_quartic: return 3;
    }
    return 0;
}

inline std::size_t potential_coef_count(std::uint8_t tag, int dim) {
    switch (tag) {
        case 1: return static_cast<std::size_t>(dim);
        case 2: return static_cast<std::size_t>(dim) + 1;
        case 3: return 2;
        default: throw IoError("field file: unknown potential tag");
    }
}

}  // namespace detail

inline void write_field(const Field& f, const ModelParams& prm, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("field file: cannot open for writing: " + path);
    const Grid& g = *f.grid();
    os.write(detail::kFieldMagic, 8);
    detail::write_le<std::uint32_t>(os, 1);
    detail::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) {
        detail::write_le<std::uint64_t>(os, g.n(a));
        detail::write_le<double>(os, g.x_min(a));
        detail::write_le<double>(os, g.x_max(a));
    }
    detail::write_le<double>(os, prm.p);
    detail::write_le<double>(os, prm.beta);
    detail::write_le<double>(os, prm.Omega);
    detail::write_le<double>(os, prm.omega);
    const std::uint8_t tag = detail::potential_tag(prm.potential);
    detail::write_le<std::uint8_t>(os, tag);
    const std::size_t nc = detail::potential_coef_count(tag, g.dim());
    if (prm.potential.coef.size() != nc)
        throw IoError("field file: potential coefficient count mismatch");
    for (double c : prm.potential.coef) detail::write_le<double>(os, c);
    for (std::size_t i = 0; i < f.size(); ++i) {
        detail::write_le<double>(os, f[i].real());
        detail::write_le<double>(os, f[i].imag());
    }
    if (!os) throw IoError("field file: write failed: " + path);
}

inline std::pair<Field, ModelParams> read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("field file: cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, detail::kFieldMagic, 8) != 0)
        throw IoError("field file: bad magic: " + path);
    const auto version = detail::read_le<std::uint32_t>(is);
    if (version != 1) throw IoError("field file: unsupported version");
    const auto dim = detail::read_le<std::uint8_t>(is);
    if (dim < 1 || dim > 2) throw IoError("field file: bad dimension");
    std::vector<AxisSpec> axes(dim);
    for (auto& a : axes) {
        a.n = detail::read_le<std::uint64_t>(is);
        a.x_min = detail::read_le<double>(is);
        a.x_max = detail::read_le<double>(is);
    }
    ModelParams prm;
    prm.p = detail::read_le<double>(is);
    prm.beta = detail::read_le<double>(is);
    prm.Omega = detail::read_le<double>(is);
    prm.omega = detail::read_le<double>(is);
    const auto tag = detail::read_le<std::uint8_t>(is);
    const std::size_t nc = detail::potential_coef_count(tag, dim);
    std::vector<double> coef(nc);
    for (double& c : coef) c = detail::read_le<double>(is);
    prm.potential.kind = tag == 1   ? PotentialSpec::Kind::harmonic
                         : tag == 2 ? PotentialSpec::Kind::harmonic_lattice
                                    : PotentialSpec::Kind::harmonic_quartic;
    prm.potential.coef = std::move(coef);

    GridPtr grid = Grid::make(axes);
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double re = detail::read_le<double>(is);
        const double im = detail::read_le<double>(is);
        f[i] = cplx(re, im);
    }
    // must end exactly at EOF; a longer or shorter payload is a corrupt file
    char probe;
    is.read(&probe, 1);
    if (!is.eof()) throw IoError("field file: size mismatch vs header: " + path);
    return {std::move(f), prm};
}

}  // namespace rnls

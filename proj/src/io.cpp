// io.cpp — persistence for field samples and resistor networks.
//
// Field samples use a two-file layout: "<prefix>.meta" holds the synthesis
// parameters as readable key/value lines, "<prefix>.f64" holds the window
// values as raw little-endian float64 in row-major order (j outer, i inner).
// A loaded sample reproduces the saved one bit for bit.
//
// Networks use the edge-list text format: a header line with the format tag,
// version and vertex count, then one line per edge — endpoint indices,
// midpoint coordinates and log-resistance at 17 significant digits. This is
// an exchange format for the resistor graph alone: vertex coordinates,
// lattice metadata and terminal groups are not persisted.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gffnet/errors.hpp"
#include "gffnet/field.hpp"
#include "gffnet/network.hpp"

namespace gffnet {
namespace {

constexpr const char* kFieldTag = "gffnet-field";
constexpr const char* kNetworkTag = "gffnet-network";
constexpr int kFormatVersion = 1;

// Construction guard from build_network; files exceeding it would produce
// conductances that overflow/underflow in the solvers.
constexpr double kLogResistanceGuard = 700.0;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t byteswap64(std::uint64_t x) {
    x = ((x & 0x00ff00ff00ff00ffULL) << 8) | ((x >> 8) & 0x00ff00ff00ff00ffULL);
    x = ((x & 0x0000ffff0000ffffULL) << 16) | ((x >> 16) & 0x0000ffff0000ffffULL);
    return (x << 32) | (x >> 32);
}

void write_doubles_le(std::ostream& out, const std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double d : v) {
            std::uint64_t bits;
            std::memcpy(&bits, &d, sizeof bits);
            bits = byteswap64(bits);
            out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
    }
}

std::vector<double> read_doubles_le(std::istream& in, std::size_t count) {
    std::vector<double> v(count);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double)) {
        throw IoError("value file shorter than the window declared in .meta");
    }
    if constexpr (std::endian::native == std::endian::big) {
        for (double& d : v) {
            std::uint64_t bits;
            std::memcpy(&bits, &d, sizeof bits);
            bits = byteswap64(bits);
            std::memcpy(&d, &bits, sizeof d);
        }
    }
    return v;
}

// Key/value lines of a .meta file; strict (no duplicate or unknown keys).
class MetaReader {
  public:
    MetaReader(std::istream& in, const std::string& path) : path_(path) {
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::istringstream ls(line);
            std::string key;
            if (!(ls >> key)) continue;  // blank line
            std::string rest;
            std::getline(ls, rest);
            if (!entries_.emplace(key, rest).second) {
                fail("duplicate key '" + key + "'", line_no);
            }
        }
    }

    std::string raw(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) fail("missing key '" + key + "'", 0);
        consumed_.insert(it->first);
        return it->second;
    }

    template <typename T>
    T get(const std::string& key) {
        std::istringstream vs(raw(key));
        T value;
        if (!(vs >> value)) fail("malformed value for '" + key + "'", 0);
        std::string extra;
        if (vs >> extra) fail("trailing tokens after '" + key + "'", 0);
        return value;
    }

    void finish() const {
        for (const auto& [key, value] : entries_) {
            (void)value;
            if (consumed_.find(key) == consumed_.end()) {
                throw IoError(path_ + ": unknown key '" + key + "'");
            }
        }
    }

  private:
    [[noreturn]] void fail(const std::string& what, int line_no) const {
        std::ostringstream os;
        os << path_ << ": " << what;
        if (line_no > 0) os << " (line " << line_no << ")";
        throw IoError(os.str());
    }

    std::string path_;
    std::map<std::string, std::string> entries_;
    std::set<std::string> consumed_;
};

}  // namespace

void save_field(const FieldSample& sample, const std::string& path_prefix) {
    const std::string meta_path = path_prefix + ".meta";
    const std::string data_path = path_prefix + ".f64";

    const auto count = static_cast<std::size_t>(sample.nx) *
                       static_cast<std::size_t>(sample.ny);
    if (sample.nx < 1 || sample.ny < 1 || sample.values.size() != count) {
        throw IoError("save_field: sample window is inconsistent with values");
    }

    std::ostringstream meta;
    meta << kFieldTag << ' ' << kFormatVersion << '\n';
    meta << "n " << sample.grid.n << '\n';
    meta << "zeta " << sample.grid.zeta << '\n';
    meta << "zeta_override " << (sample.grid.zeta_override ? 1 : 0) << '\n';
    meta << "box " << fmt17(sample.grid.box.x0) << ' ' << fmt17(sample.grid.box.y0)
         << ' ' << fmt17(sample.grid.box.x1) << ' ' << fmt17(sample.grid.box.y1)
         << '\n';
    meta << "kernel_m " << sample.kernel.m << '\n';
    meta << "kernel_n " << sample.kernel.n << '\n';
    meta << "kernel_kind "
         << (sample.kernel.kind == KernelKind::Truncated ? "truncated" : "full")
         << '\n';
    meta << "eps0 " << fmt17(sample.kernel.eps0) << '\n';
    meta << "time_slices " << sample.kernel.time_slices << '\n';
    meta << "seed " << sample.seed << '\n';
    meta << "negated " << (sample.negated ? 1 : 0) << '\n';
    meta << "window " << sample.i0 << ' ' << sample.j0 << ' ' << sample.nx << ' '
         << sample.ny << '\n';

    std::ofstream mf(meta_path, std::ios::binary | std::ios::trunc);
    if (!mf) throw IoError("cannot open " + meta_path + " for writing");
    mf << meta.str();
    mf.flush();
    if (!mf) throw IoError("failed writing " + meta_path);

    std::ofstream df(data_path, std::ios::binary | std::ios::trunc);
    if (!df) throw IoError("cannot open " + data_path + " for writing");
    write_doubles_le(df, sample.values);
    df.flush();
    if (!df) throw IoError("failed writing " + data_path);
}

FieldSample load_field(const std::string& path_prefix) {
    const std::string meta_path = path_prefix + ".meta";
    const std::string data_path = path_prefix + ".f64";

    std::ifstream mf(meta_path, std::ios::binary);
    if (!mf) throw IoError("cannot open " + meta_path);

    std::string tag;
    int version = 0;
    std::string header;
    if (!std::getline(mf, header)) throw IoError(meta_path + ": empty file");
    {
        std::istringstream hs(header);
        if (!(hs >> tag >> version) || tag != kFieldTag) {
            throw IoError(meta_path + ": not a field meta file");
        }
        if (version != kFormatVersion) {
            throw IoError(meta_path + ": unsupported format version " +
                          std::to_string(version));
        }
    }

    MetaReader meta(mf, meta_path);

    FieldSample sample;
    sample.grid.n = meta.get<int>("n");
    sample.grid.zeta = meta.get<int>("zeta");
    sample.grid.zeta_override = meta.get<int>("zeta_override") != 0;
    {
        std::istringstream bs(meta.raw("box"));
        if (!(bs >> sample.grid.box.x0 >> sample.grid.box.y0 >>
              sample.grid.box.x1 >> sample.grid.box.y1)) {
            throw IoError(meta_path + ": malformed value for 'box'");
        }
    }
    sample.kernel.m = meta.get<int>("kernel_m");
    sample.kernel.n = meta.get<int>("kernel_n");
    {
        const std::string kind = meta.get<std::string>("kernel_kind");
        if (kind == "full") {
            sample.kernel.kind = KernelKind::Full;
        } else if (kind == "truncated") {
            sample.kernel.kind = KernelKind::Truncated;
        } else {
            throw IoError(meta_path + ": unknown kernel_kind '" + kind + "'");
        }
    }
    sample.kernel.eps0 = meta.get<double>("eps0");
    sample.kernel.time_slices = meta.get<int>("time_slices");
    sample.seed = meta.get<std::uint64_t>("seed");
    sample.negated = meta.get<int>("negated") != 0;
    {
        std::istringstream ws(meta.raw("window"));
        if (!(ws >> sample.i0 >> sample.j0 >> sample.nx >> sample.ny)) {
            throw IoError(meta_path + ": malformed value for 'window'");
        }
    }
    meta.finish();

    sample.grid.validate();
    sample.kernel.validate();
    if (sample.nx < 1 || sample.ny < 1) {
        throw IoError(meta_path + ": window dimensions must be positive");
    }
    const auto count = static_cast<std::size_t>(sample.nx) *
                       static_cast<std::size_t>(sample.ny);

    std::ifstream df(data_path, std::ios::binary);
    if (!df) throw IoError("cannot open " + data_path);
    sample.values = read_doubles_le(df, count);
    if (df.peek() != std::char_traits<char>::eof()) {
        throw IoError(data_path + ": trailing bytes beyond the declared window");
    }
    return sample;
}

void save_network(const Network& net, const std::string& path) {
    const auto nv = static_cast<long long>(net.coords.size());
    for (const NetEdge& e : net.edges) {
        if (e.u < 0 || e.v < 0 || e.u >= nv || e.v >= nv) {
            throw IoError("save_network: edge endpoint outside the vertex set");
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << kNetworkTag << ' ' << kFormatVersion << ' ' << nv << '\n';
    for (const NetEdge& e : net.edges) {
        out << e.u << ' ' << e.v << ' ' << fmt17(e.midpoint.x) << ' '
            << fmt17(e.midpoint.y) << ' ' << fmt17(e.log_r) << '\n';
    }
    out.flush();
    if (!out) throw IoError("failed writing " + path);
}

Network load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    std::string header;
    if (!std::getline(in, header)) throw IoError(path + ": empty file");
    std::string tag;
    int version = 0;
    long long nv = 0;
    {
        std::istringstream hs(header);
        if (!(hs >> tag >> version >> nv) || tag != kNetworkTag) {
            throw IoError(path + ": not a network edge-list file");
        }
        if (version != kFormatVersion) {
            throw IoError(path + ": unsupported format version " +
                          std::to_string(version));
        }
        if (nv < 1 || nv > std::numeric_limits<int>::max()) {
            throw IoError(path + ": vertex count out of range");
        }
    }

    Network net;
    net.coords.assign(static_cast<std::size_t>(nv), Vec2{0.0, 0.0});
    net.provenance = "edge-list " + path;

    long long u = 0;
    while (in >> u) {
        long long v = 0;
        NetEdge edge;
        if (!(in >> v >> edge.midpoint.x >> edge.midpoint.y >> edge.log_r)) {
            throw IoError(path + ": truncated edge record");
        }
        if (u < 0 || v < 0 || u >= nv || v >= nv) {
            throw IoError(path + ": edge endpoint outside the vertex set");
        }
        if (u == v) throw IoError(path + ": self-loop edge");
        if (!(std::abs(edge.log_r) <= kLogResistanceGuard)) {
            throw IoError(path + ": |log r| exceeds the conductance guard");
        }
        edge.u = static_cast<int>(u);
        edge.v = static_cast<int>(v);
        net.edges.push_back(edge);
    }
    if (!in.eof()) throw IoError(path + ": malformed edge record");
    return net;
}

}  // namespace gffnet

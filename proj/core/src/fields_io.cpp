#include "supnorm/fields_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace supnorm {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

[[noreturn]] void fail_line(const std::string& path, int line,
                            const std::string& what) {
    fail(path, "line " + std::to_string(line) + ": " + what);
}

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) fail(path, "cannot open file");
    return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) fail(path, "cannot open file for writing");
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

double parse_double(const std::string& s, const std::string& path, int line) {
    const char* c = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(c, &end);
    if (end == c) fail_line(path, line, "expected a number, got '" + s + "'");
    return v;
}

long parse_int(const std::string& s, const std::string& path, int line) {
    const char* c = s.c_str();
    char* end = nullptr;
    const long v = std::strtol(c, &end, 10);
    if (end == c) fail_line(path, line, "expected an integer, got '" + s + "'");
    return v;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_field_csv(const ScalarField& f, const GridDomain& dom,
                     const std::string& path) {
    std::ofstream out = open_out(path);
    out << "i,j,x,y,value\n";
    for (int n = 0; n < dom.node_count(); ++n) {
        const Vec2 p = dom.pos(n);
        out << dom.node_i(n) << ',' << dom.node_j(n) << ',' << fmt17(p.x) << ','
            << fmt17(p.y) << ',' << fmt17(f[n]) << '\n';
    }
    if (!out) fail(path, "write failed");
}

ScalarField read_field_csv(const GridDomain& dom, const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) fail(path, "empty file");
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != "i,j,x,y,value")
        fail(path, "expected header 'i,j,x,y,value', got '" + line + "'");
    ScalarField f = make_field(dom, "");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 5) fail_line(path, lineno, "expected 5 columns");
        const long i = parse_int(cells[0], path, lineno);
        const long j = parse_int(cells[1], path, lineno);
        if (i < 0 || i >= dom.nx || j < 0 || j >= dom.ny)
            fail_line(path, lineno, "node index out of range");
        f[dom.node(static_cast<int>(i), static_cast<int>(j))] =
            parse_double(cells[4], path, lineno);
    }
    return f;
}

ScalarField read_boundary_csv(const GridDomain& dom, const std::string& path) {
    const ScalarField full = read_field_csv(dom, path);
    ScalarField g = make_field(dom, "g");
    for (int b : dom.boundary_nodes) {
        if (!full.has(b))
            fail(path, "boundary node (" + std::to_string(dom.node_i(b)) + "," +
                           std::to_string(dom.node_j(b)) + ") has no value");
        g[b] = full[b];
    }
    return g;
}

namespace {

int next_pgm_token(std::istream& in, const std::string& path) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
            continue;
        }
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        break;
    }
    int v = -1;
    in >> v;
    if (v < 0) fail(path, "malformed PGM header");
    return v;
}

}  // namespace

MaskImage read_pgm_mask(const std::string& path) {
    std::ifstream in = open_in(path, /*binary=*/true);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '2' && m1 != '5')) fail(path, "not a P2/P5 PGM file");
    const bool binary = m1 == '5';
    MaskImage img;
    img.width = next_pgm_token(in, path);
    img.height = next_pgm_token(in, path);
    const int maxval = next_pgm_token(in, path);
    if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 65535)
        fail(path, "unsupported PGM dimensions");
    img.inside.assign(static_cast<std::size_t>(img.width) * img.height, 0);
    if (binary) {
        in.get();  // single whitespace after maxval
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<char> raw(img.inside.size() * bytes);
        in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
        if (in.gcount() != static_cast<std::streamsize>(raw.size()))
            fail(path, "truncated pixel data");
        for (std::size_t k = 0; k < img.inside.size(); ++k) {
            const int v = bytes == 1
                              ? static_cast<unsigned char>(raw[k])
                              : (static_cast<unsigned char>(raw[2 * k]) << 8) |
                                    static_cast<unsigned char>(raw[2 * k + 1]);
            img.inside[k] = v != 0;
        }
    } else {
        for (std::size_t k = 0; k < img.inside.size(); ++k) {
            int v = -1;
            in >> v;
            if (v < 0) fail(path, "truncated pixel data");
            img.inside[k] = v != 0;
        }
    }
    return img;
}

void write_heatmap_pgm(const ScalarField& f, const GridDomain& dom,
                       const std::string& path) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int n = 0; n < dom.node_count(); ++n)
        if (f.has(n)) {
            lo = std::min(lo, f[n]);
            hi = std::max(hi, f[n]);
        }
    const bool flat = !(hi > lo);
    std::ofstream out = open_out(path, /*binary=*/true);
    out << "P5\n" << dom.nx << ' ' << dom.ny << "\n255\n";
    std::vector<char> row(dom.nx);
    for (int j = dom.ny - 1; j >= 0; --j) {
        for (int i = 0; i < dom.nx; ++i) {
            const int n = dom.node(i, j);
            unsigned char byte = 0;
            if (f.has(n))
                byte = flat ? 255
                            : static_cast<unsigned char>(
                                  std::lround((f[n] - lo) / (hi - lo) * 255.0));
            row[i] = static_cast<char>(byte);
        }
        out.write(row.data(), dom.nx);
    }
    if (!out) fail(path, "write failed");

    nlohmann::json scale;
    scale["min"] = lo;
    scale["max"] = hi;
    scale["width"] = dom.nx;
    scale["height"] = dom.ny;
    std::ofstream side = open_out(path + ".scale.json");
    side << scale.dump(2) << '\n';
    if (!side) fail(path + ".scale.json", "write failed");
}

TabulatedProfile read_profile_csv(const std::string& path, Vec2 origin,
                                  double h, int nx, int ny) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) fail(path, "empty file");
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != "node,dir,lam,rho")
        fail(path, "expected header 'node,dir,lam,rho', got '" + line + "'");

    struct Row {
        int node, dir;
        double lam, rho;
    };
    std::vector<Row> rows;
    int n_dirs = 0;
    const int n_nodes = nx * ny;
    std::map<double, int> lams;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 4) fail_line(path, lineno, "expected 4 columns");
        Row r;
        r.node = static_cast<int>(parse_int(cells[0], path, lineno));
        r.dir = static_cast<int>(parse_int(cells[1], path, lineno));
        r.lam = parse_double(cells[2], path, lineno);
        r.rho = parse_double(cells[3], path, lineno);
        if (r.node < 0 || r.node >= n_nodes)
            fail_line(path, lineno, "node out of range");
        if (r.dir < 0) fail_line(path, lineno, "dir must be nonnegative");
        n_dirs = std::max(n_dirs, r.dir + 1);
        lams.emplace(r.lam, 0);
        rows.push_back(r);
    }
    if (rows.empty()) fail(path, "no data rows");

    TabulatedProfile prof;
    prof.origin = origin;
    prof.h = h;
    prof.nx = nx;
    prof.ny = ny;
    prof.n_dirs = n_dirs;
    int k = 0;
    for (auto& [lam, idx] : lams) {
        idx = k++;
        prof.lambdas.push_back(lam);
    }
    const std::size_t nl = prof.lambdas.size();
    prof.rho.assign(static_cast<std::size_t>(n_nodes) * n_dirs * nl,
                    std::numeric_limits<double>::quiet_NaN());
    for (const Row& r : rows) {
        const std::size_t at =
            (static_cast<std::size_t>(r.node) * n_dirs + r.dir) * nl +
            lams.at(r.lam);
        if (!std::isnan(prof.rho[at]))
            fail(path, "duplicate entry for node " + std::to_string(r.node) +
                           ", dir " + std::to_string(r.dir));
        prof.rho[at] = r.rho;
    }
    for (double v : prof.rho)
        if (std::isnan(v))
            fail(path, "incomplete table: every (node, dir, lam) row is required");
    prof.validate();
    return prof;
}

}  // namespace supnorm

#include "psos/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "psos/errors.hpp"

namespace psos {

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-blank line with comments removed, split on whitespace.
    bool next(std::vector<std::string>& tokens) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream words(line);
            tokens.clear();
            for (std::string w; words >> w;) tokens.push_back(w);
            if (!tokens.empty()) return true;
        }
        return false;
    }

    int line() const { return line_; }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_); }

    int to_int(const std::string& s) const {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail("expected an integer, got '" + s + "'");
        return v;
    }

    double to_real(const std::string& s) const {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail("expected a real, got '" + s + "'");
        return v;
    }

    void expect_header(const std::string& a, const std::string& b) {
        std::vector<std::string> t;
        if (!next(t)) fail("missing '" + a + " " + b + "' header");
        if (t.size() != 2 || t[0] != a || t[1] != b) fail("expected '" + a + " " + b + "' header");
    }

private:
    std::istream& in_;
    int line_ = 0;
};

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for reading");
    return f;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    return f;
}

void check_written(std::ostream& f, const std::string& path) {
    f.flush();
    if (!f) throw Error("failed writing '" + path + "'");
}

}  // namespace

std::string format_real(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_model(std::ostream& out, const GraphModel& model) {
    out << "graphmodel v1\n";
    out << "n " << model.num_vertices() << '\n';
    for (int i = 0; i < model.num_vertices(); ++i) {
        if (model.vertex_weight(i) != 0.0) out << "v " << i << ' ' << format_real(model.vertex_weight(i)) << '\n';
    }
    for (const Edge& e : model.edges()) out << "e " << e.i << ' ' << e.j << ' ' << format_real(e.weight) << '\n';
}

GraphModel read_model(std::istream& in) {
    LineReader r(in);
    r.expect_header("graphmodel", "v1");
    std::vector<std::string> t;
    if (!r.next(t) || t.size() != 2 || t[0] != "n") r.fail("expected 'n <count>'");
    const int n = r.to_int(t[1]);
    if (n < 0) r.fail("vertex count must be non-negative");
    std::vector<double> h(static_cast<std::size_t>(n), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Edge> edges;
    while (r.next(t)) {
        if (t[0] == "v") {
            if (t.size() != 3) r.fail("expected 'v <i> <theta>'");
            const int i = r.to_int(t[1]);
            if (i < 0 || i >= n) r.fail("vertex " + t[1] + " out of range");
            if (seen[static_cast<std::size_t>(i)]) r.fail("duplicate vertex " + t[1]);
            seen[static_cast<std::size_t>(i)] = 1;
            h[static_cast<std::size_t>(i)] = r.to_real(t[2]);
        } else if (t[0] == "e") {
            if (t.size() != 4) r.fail("expected 'e <i> <j> <theta>'");
            edges.push_back({r.to_int(t[1]), r.to_int(t[2]), r.to_real(t[3])});
        } else {
            r.fail("unknown record '" + t[0] + "'");
        }
    }
    return GraphModel(n, std::move(edges), std::move(h));
}

void write_covering(std::ostream& out, const RegionCovering& cov) {
    out << "regions v1\n";
    for (const auto& region : cov.regions) {
        out << 'r';
        for (int v : region) out << ' ' << v;
        out << '\n';
    }
}

RegionCovering read_covering(std::istream& in) {
    LineReader r(in);
    r.expect_header("regions", "v1");
    RegionCovering cov;
    std::vector<std::string> t;
    while (r.next(t)) {
        if (t[0] != "r" || t.size() < 2 || t.size() > 5) r.fail("expected 'r <i> [<j> [<k> [<l>]]]'");
        std::vector<int> region;
        for (std::size_t k = 1; k < t.size(); ++k) region.push_back(r.to_int(t[k]));
        cov.regions.push_back(std::move(region));
    }
    return cov;
}

void write_assignment(std::ostream& out, const Assignment& x) {
    for (std::size_t i = 0; i < x.size(); ++i) out << (i ? " " : "") << (x[i] > 0 ? "1" : "-1");
    out << '\n';
}

Assignment read_assignment(std::istream& in) {
    LineReader r(in);
    std::vector<std::string> t;
    if (!r.next(t)) r.fail("empty assignment");
    std::vector<Spin> x;
    for (const auto& w : t) {
        const int v = r.to_int(w[0] == '+' ? w.substr(1) : w);
        if (v != 1 && v != -1) r.fail("assignment entries must be +1 or -1");
        x.push_back(static_cast<Spin>(v));
    }
    std::vector<std::string> extra;
    if (r.next(extra)) r.fail("assignment must be a single line");
    return Assignment(std::move(x));
}

void write_gram_state(std::ostream& out, const GramState& state) {
    const GramIndex& index = *state.index;
    out << "gramstate v1\n";
    out << "n " << index.num_vertices() << " rank " << state.rank << " pairs " << index.pairs().size() << '\n';
    for (const auto& [i, j] : index.pairs()) out << "p " << i << ' ' << j << '\n';
    for (int s = 0; s < index.size(); ++s) {
        for (int k = 0; k < state.rank; ++k) out << (k ? " " : "") << format_real(state.vectors(k, s));
        out << '\n';
    }
}

GramState read_gram_state(std::istream& in) {
    LineReader r(in);
    r.expect_header("gramstate", "v1");
    std::vector<std::string> t;
    if (!r.next(t) || t.size() != 6 || t[0] != "n" || t[2] != "rank" || t[4] != "pairs") {
        r.fail("expected 'n <count> rank <r> pairs <m>'");
    }
    const int n = r.to_int(t[1]);
    const int rank = r.to_int(t[3]);
    const int m = r.to_int(t[5]);
    if (n < 0 || rank < 1 || m < 0) r.fail("invalid sizes");
    std::vector<std::pair<int, int>> pairs;
    for (int k = 0; k < m; ++k) {
        if (!r.next(t) || t.size() != 3 || t[0] != "p") r.fail("expected 'p <i> <j>'");
        const int i = r.to_int(t[1]);
        const int j = r.to_int(t[2]);
        if (i < 0 || j <= i || j >= n) r.fail("pair out of range");
        pairs.emplace_back(i, j);
    }
    GramState state;
    state.rank = rank;
    try {
        state.index = std::make_shared<const GramIndex>(n, std::move(pairs));
    } catch (const Error& e) {
        r.fail(e.what());
    }
    state.vectors.resize(rank, state.index->size());
    for (int s = 0; s < state.index->size(); ++s) {
        if (!r.next(t) || static_cast<int>(t.size()) != rank) r.fail("expected " + std::to_string(rank) + " reals");
        for (int k = 0; k < rank; ++k) state.vectors(k, s) = r.to_real(t[static_cast<std::size_t>(k)]);
    }
    if (r.next(t)) r.fail("trailing data");
    return state;
}

BinaryImage read_pgm(std::istream& in) {
    std::string magic;
    in >> magic;
    if (magic != "P2" && magic != "P5") throw StructureError("unsupported PGM magic '" + magic + "'");
    auto header_int = [&in]() {
        in >> std::ws;
        while (in.peek() == '#') {
            std::string skip;
            std::getline(in, skip);
            in >> std::ws;
        }
        int v = -1;
        if (!(in >> v)) throw StructureError("truncated PGM header");
        return v;
    };
    const int width = header_int();
    const int height = header_int();
    const int maxval = header_int();
    if (width <= 0 || height <= 0) throw StructureError("PGM dimensions must be positive");
    if (maxval <= 0 || maxval > 255) throw StructureError("unsupported PGM maxval " + std::to_string(maxval));
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<Spin> pixels(count);
    if (magic == "P2") {
        for (std::size_t k = 0; k < count; ++k) {
            int g = -1;
            if (!(in >> g)) throw StructureError("truncated PGM pixel data");
            if (g < 0 || g > maxval) throw StructureError("PGM pixel out of range");
            pixels[k] = g >= 128 ? Spin{1} : Spin{-1};
        }
    } else {
        in.get();  // single whitespace after maxval
        std::vector<unsigned char> raw(count);
        if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count))) {
            throw StructureError("truncated PGM pixel data");
        }
        for (std::size_t k = 0; k < count; ++k) pixels[k] = raw[k] >= 128 ? Spin{1} : Spin{-1};
    }
    return BinaryImage(width, height, std::move(pixels));
}

void write_pgm(std::ostream& out, const BinaryImage& image) {
    out << "P2\n" << image.width << ' ' << image.height << "\n255\n";
    for (int row = 0; row < image.height; ++row) {
        for (int col = 0; col < image.width; ++col) out << (col ? " " : "") << (image.at(row, col) > 0 ? 255 : 0);
        out << '\n';
    }
}

GraphModel read_model_file(const std::string& path) {
    auto f = open_in(path);
    return read_model(f);
}

void write_model_file(const std::string& path, const GraphModel& model) {
    auto f = open_out(path);
    write_model(f, model);
    check_written(f, path);
}

RegionCovering read_covering_file(const std::string& path) {
    auto f = open_in(path);
    return read_covering(f);
}

Assignment read_assignment_file(const std::string& path) {
    auto f = open_in(path);
    return read_assignment(f);
}

void write_assignment_file(const std::string& path, const Assignment& x) {
    auto f = open_out(path);
    write_assignment(f, x);
    check_written(f, path);
}

GramState read_gram_state_file(const std::string& path) {
    auto f = open_in(path);
    return read_gram_state(f);
}

void write_gram_state_file(const std::string& path, const GramState& state) {
    auto f = open_out(path);
    write_gram_state(f, state);
    check_written(f, path);
}

BinaryImage read_pgm_file(const std::string& path) {
    auto f = open_in(path);
    return read_pgm(f);
}

void write_pgm_file(const std::string& path, const BinaryImage& image) {
    auto f = open_out(path);
    write_pgm(f, image);
    check_written(f, path);
}

}  // namespace psos

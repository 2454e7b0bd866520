#include "image_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mrd {

namespace {

void rename_into_place(const std::string& tmp, const std::string& path) {
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot move file into place: " + path);
    }
}

bool ends_with(const std::string& s, const char* suffix) {
    const std::size_t m = std::strlen(suffix);
    return s.size() >= m && s.compare(s.size() - m, m, suffix) == 0;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw std::runtime_error("cannot write file: " + path);
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed: " + tmp);
    }
    rename_into_place(tmp, path);
}

PixelGrid read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read csv: " + path);

    std::vector<double> values;
    std::string line;
    int cols = -1, rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int count = 0;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            const std::string cell = line.substr(pos, comma - pos);
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("bad csv value '" + cell + "' in " + path);
            }
            ++count;
            pos = comma + 1;
            if (comma == line.size()) break;
        }
        if (cols < 0) cols = count;
        else if (count != cols)
            throw std::runtime_error("ragged csv rows in " + path);
        ++rows;
    }
    if (rows == 0 || cols <= 0) throw std::runtime_error("empty csv: " + path);
    return PixelGrid(rows, cols, std::move(values));
}

void write_csv(const PixelGrid& g, const std::string& path) {
    std::ostringstream os;
    char buf[40];
    for (int i = 0; i < g.rows(); ++i) {
        for (int j = 0; j < g.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", g(i, j));
            os << buf;
            os << (j + 1 < g.cols() ? ',' : '\n');
        }
    }
    write_text_atomic(path, os.str());
}

namespace {

// Reads one whitespace-delimited PNM header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw std::runtime_error("truncated pgm header");
    return tok;
}

}  // namespace

PixelGrid read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read pgm: " + path);
    if (pnm_token(in) != "P5") throw std::runtime_error("not a binary pgm (P5): " + path);
    const int cols = std::stoi(pnm_token(in));
    const int rows = std::stoi(pnm_token(in));
    const int maxval = std::stoi(pnm_token(in));
    if (rows < 1 || cols < 1 || maxval < 1 || maxval > 65535)
        throw std::runtime_error("bad pgm header: " + path);
    // The header ends with exactly one whitespace byte, already consumed by
    // the token reader's terminating isspace.

    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(static_cast<std::size_t>(rows) * cols * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw std::runtime_error("truncated pgm data: " + path);

    PixelGrid g(rows, cols);
    std::size_t k = 0;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            unsigned v = raw[k++];
            if (bytes == 2) v = (v << 8) | raw[k++];
            g(i, j) = static_cast<double>(v);
        }
    }
    return g;
}

PgmMapping write_pgm(const PixelGrid& g, const std::string& path, int maxval,
                     const std::string& sidecar_path) {
    if (maxval != 255 && maxval != 65535)
        throw std::invalid_argument("pgm maxval must be 255 or 65535");
    g.require_finite("pgm image");

    PgmMapping map;
    map.maxval = maxval;
    map.lo = map.hi = g(0, 0);
    bool integral = true;
    for (double v : g.values()) {
        map.lo = std::min(map.lo, v);
        map.hi = std::max(map.hi, v);
        if (v != std::floor(v)) integral = false;
    }
    map.identity = integral && map.lo >= 0.0 && map.hi <= maxval;

    const int bytes = maxval > 255 ? 2 : 1;
    std::string body;
    {
        std::ostringstream head;
        head << "P5\n" << g.cols() << ' ' << g.rows() << '\n' << maxval << '\n';
        body = head.str();
    }
    body.reserve(body.size() + g.size() * bytes);
    const double span = map.hi - map.lo;
    for (int i = 0; i < g.rows(); ++i) {
        for (int j = 0; j < g.cols(); ++j) {
            double v = g(i, j);
            if (map.identity) {
                // keep as is
            } else if (span > 0.0) {
                v = std::round((v - map.lo) / span * maxval);
            } else {
                // Constant image: keep the value when it is representable,
                // otherwise everything maps to 0.
                v = (map.lo >= 0.0 && map.lo <= maxval) ? std::round(map.lo) : 0.0;
            }
            const unsigned u =
                static_cast<unsigned>(std::min(std::max(v, 0.0), double(maxval)));
            if (bytes == 2) body.push_back(static_cast<char>((u >> 8) & 0xff));
            body.push_back(static_cast<char>(u & 0xff));
        }
    }
    write_text_atomic(path, body);

    if (!sidecar_path.empty()) {
        std::ostringstream os;
        os.precision(17);
        os << "# affine mapping used when quantizing to pgm\n";
        os << "min " << map.lo << "\n";
        os << "max " << map.hi << "\n";
        os << "maxval " << map.maxval << "\n";
        os << "identity " << (map.identity ? 1 : 0) << "\n";
        write_text_atomic(sidecar_path, os.str());
    }
    return map;
}

PixelGrid read_image(const std::string& path) {
    if (ends_with(path, ".pgm") || ends_with(path, ".pnm")) return read_pgm(path);
    return read_csv(path);
}

}  // namespace mrd

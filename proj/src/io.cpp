#include "fracfact/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fracfact/error.hpp"

namespace fracfact {

namespace {

// strip comments and surrounding whitespace
std::string clean_line(std::string line) {
    auto hash = line.find('#');
    if (hash != std::string::npos)
        line.erase(hash);
    auto begin = line.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos)
        return "";
    auto end = line.find_last_not_of(" \t\r\n");
    return line.substr(begin, end - begin + 1);
}

} // namespace

IntMatrix read_matrix_4ti2(std::istream& in) {
    long long rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0)
        throw ParseError("matrix file: missing or malformed \"rows cols\" header");
    IntMatrix m(static_cast<int>(rows), static_cast<int>(cols));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            long long v;
            if (!(in >> v))
                throw ParseError("matrix file: truncated at row " + std::to_string(i + 1));
            m.at(i, j) = static_cast<long>(v);
        }
    return m;
}

void write_matrix_4ti2(std::ostream& out, const IntMatrix& m) {
    size_t width = 1;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            width = std::max(width, m.at(i, j).get_str().size());
    out << m.rows() << ' ' << m.cols() << '\n';
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            std::string s = m.at(i, j).get_str();
            out << (j ? " " : "") << std::string(width - s.size(), ' ') << s;
        }
        out << '\n';
    }
}

DesignSpec read_design_file(std::istream& in) {
    std::string line;
    std::string header;
    while (std::getline(in, line)) {
        header = clean_line(line);
        if (!header.empty())
            break;
    }
    std::istringstream hs(header);
    int p = 0, q = 0;
    if (!(hs >> p >> q))
        throw ParseError("design file: first line must be \"p q\"");
    if (q < 0 || q >= p)
        throw ParseError("design file: need 0 <= q < p");

    std::vector<Generator> gens;
    while (static_cast<int>(gens.size()) < q) {
        if (!std::getline(in, line))
            throw ParseError("design file: expected " + std::to_string(q) +
                             " generator lines \"X=WORD\"");
        std::string body = clean_line(line);
        if (body.empty())
            continue;
        auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ParseError("design file: generator line must look like \"E=ABC\", got \"" +
                             body + "\"");
        std::string lhs = clean_line(body.substr(0, eq));
        std::string rhs = clean_line(body.substr(eq + 1));
        if (lhs.size() != 1)
            throw ParseError("design file: generator target must be a single factor letter");
        int target = letter_factor(lhs[0]);
        if (target == 0 || target > p)
            throw ParseError("design file: invalid generator target \"" + lhs + "\"");
        gens.push_back(Generator{target, Word::parse(rhs, p)});
    }
    return DesignSpec(p, std::move(gens));
}

DesignSpec read_design_path(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open design file: " + path);
    return read_design_file(in);
}

ModelSpec read_model_file(std::istream& in, int p, bool closure) {
    std::string line;
    while (std::getline(in, line)) {
        std::string body = clean_line(line);
        if (!body.empty())
            return ModelSpec::parse(body, p, closure);
    }
    throw ParseError("model file: expected a line of slash-separated words");
}

ModelSpec read_model_path(const std::string& path, int p, bool closure) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open model file: " + path);
    return read_model_file(in, p, closure);
}

DataSet read_data_file(std::istream& in) {
    DataSet ds;
    std::string line;
    int columns = 0;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = clean_line(line);
        if (body.empty())
            continue;
        std::istringstream ls(body);
        long long a = 0, b = 0;
        if (!(ls >> a))
            throw ParseError("data file: bad line " + std::to_string(lineno));
        const bool has_second = static_cast<bool>(ls >> b);
        long long extra;
        if (ls >> extra)
            throw ParseError("data file: line " + std::to_string(lineno) +
                             " has more than two columns");
        const int cols = has_second ? 2 : 1;
        if (columns == 0) {
            columns = cols;
            if (columns == 2)
                ds.denominators.emplace();
        } else if (columns != cols) {
            throw ParseError("data file: inconsistent column count at line " +
                             std::to_string(lineno));
        }
        if (a < 0 || (has_second && (b < 0 || a > b)))
            throw ParseError("data file: line " + std::to_string(lineno) +
                             " must satisfy 0 <= count (<= denominator)");
        ds.counts.push_back(a);
        if (has_second)
            ds.denominators->push_back(b);
    }
    if (ds.counts.empty())
        throw ParseError("data file: no observations");
    return ds;
}

DataSet read_data_path(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open data file: " + path);
    return read_data_file(in);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string file_digest(const std::string& path) {
    const std::string bytes = read_text_file(path);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["version"] = version;
    j["command"] = command;
    j["inputs"] = input_digests;
    j["config"] = config;
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& m, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write manifest: " + path);
    out << m.to_json();
}

} // namespace fracfact

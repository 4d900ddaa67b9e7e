#include "gbfs/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace gbfs {
namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;  // from_chars rejects an explicit plus
    if (first == last) return false;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

int map_label(double raw, const std::string& where) {
    if (raw == 1.0) return +1;
    if (raw == -1.0) return -1;
    if (raw == 0.0) return -1;
    throw std::runtime_error("label outside {0,1,-1,+1} at " + where);
}

std::string shortest_repr(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

double unit_draw(std::mt19937_64& rng) {
    // 53-bit mantissa draw in [0,1); stable across platforms.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<double> Dataset::row(int i) const {
    std::vector<double> out(columns.size());
    for (size_t f = 0; f < columns.size(); ++f) out[f] = columns[f][i];
    return out;
}

void Dataset::validate() const {
    if (d() < 1) throw std::runtime_error("dataset invariant: d >= 1");
    if (n() < 1) throw std::runtime_error("dataset invariant: n >= 1");
    for (const auto& col : columns) {
        if (static_cast<int>(col.size()) != n())
            throw std::runtime_error("dataset invariant: column length equals n");
        for (double v : col)
            if (!std::isfinite(v)) throw std::runtime_error("dataset invariant: all values finite");
    }
    for (int y : labels)
        if (y != -1 && y != 1) throw std::runtime_error("dataset invariant: labels in {-1,+1}");
    if (!feature_names.empty() && static_cast<int>(feature_names.size()) != d())
        throw std::runtime_error("dataset invariant: feature_names length equals d");
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);

    std::vector<std::vector<std::string>> raw;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        raw.push_back(split_csv_line(line));
    }
    if (raw.empty()) throw std::runtime_error("empty csv file: " + path);

    // Header iff any cell of the first row fails to parse as a number.
    bool has_header = false;
    for (const auto& cell : raw[0]) {
        double tmp;
        if (!parse_double(cell, tmp)) {
            has_header = true;
            break;
        }
    }

    const size_t width = raw[0].size();
    for (size_t r = 0; r < raw.size(); ++r) {
        if (raw[r].size() != width)
            throw std::runtime_error("ragged csv row at line " + std::to_string(r + 1) + ": expected " +
                                     std::to_string(width) + " cells, got " + std::to_string(raw[r].size()));
    }

    int label_idx = -1;
    if (all_digits(label_column)) {
        label_idx = std::stoi(label_column);
        if (label_idx < 0 || label_idx >= static_cast<int>(width))
            throw std::runtime_error("label column index " + label_column + " out of range for width " +
                                     std::to_string(width));
    } else {
        if (!has_header)
            throw std::runtime_error("label column '" + label_column + "' requires a header row");
        for (size_t c = 0; c < width; ++c)
            if (raw[0][c] == label_column) label_idx = static_cast<int>(c);
        if (label_idx < 0)
            throw std::runtime_error("label column '" + label_column + "' not found in header");
    }

    Dataset ds;
    const size_t first_data = has_header ? 1 : 0;
    const size_t n_rows = raw.size() - first_data;
    if (n_rows == 0) throw std::runtime_error("csv has a header but no data rows: " + path);

    ds.columns.assign(width - 1, std::vector<double>(n_rows));
    ds.labels.resize(n_rows);
    if (has_header) {
        for (size_t c = 0; c < width; ++c)
            if (static_cast<int>(c) != label_idx) ds.feature_names.push_back(raw[0][c]);
    }

    for (size_t r = first_data; r < raw.size(); ++r) {
        size_t out_col = 0;
        for (size_t c = 0; c < width; ++c) {
            double v;
            if (!parse_double(raw[r][c], v))
                throw std::runtime_error("non-numeric cell '" + raw[r][c] + "' at line " +
                                         std::to_string(r + 1) + ", column " + std::to_string(c + 1));
            if (!std::isfinite(v))
                throw std::runtime_error("non-finite value at line " + std::to_string(r + 1) +
                                         ", column " + std::to_string(c + 1));
            if (static_cast<int>(c) == label_idx) {
                ds.labels[r - first_data] =
                    map_label(v, "line " + std::to_string(r + 1) + ", column " + std::to_string(c + 1));
            } else {
                ds.columns[out_col++][r - first_data] = v;
            }
        }
    }
    ds.validate();
    return ds;
}

Dataset load_libsvm(const std::string& path, int num_features) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);

    struct SparseRow {
        int label;
        std::vector<std::pair<int, double>> entries;  // 0-based indices
    };
    std::vector<SparseRow> rows;
    int max_index = 0;

    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;

        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        double raw_label;
        if (!parse_double(tok, raw_label))
            throw std::runtime_error("bad label '" + tok + "' at line " + std::to_string(lineno));
        SparseRow row;
        row.label = map_label(raw_label, "line " + std::to_string(lineno));

        int prev_idx = 0;  // indices are 1-based and strictly increasing
        while (ls >> tok) {
            auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("expected idx:val, got '" + tok + "' at line " +
                                         std::to_string(lineno));
            int idx;
            double val;
            const std::string idx_s = tok.substr(0, colon);
            const std::string val_s = tok.substr(colon + 1);
            double idx_d;
            if (!parse_double(idx_s, idx_d) || idx_d != std::floor(idx_d) || idx_d < 1)
                throw std::runtime_error("bad feature index '" + idx_s + "' at line " +
                                         std::to_string(lineno));
            idx = static_cast<int>(idx_d);
            if (!parse_double(val_s, val))
                throw std::runtime_error("bad feature value '" + val_s + "' at line " +
                                         std::to_string(lineno));
            if (idx <= prev_idx)
                throw std::runtime_error("non-increasing feature index " + std::to_string(idx) +
                                         " at line " + std::to_string(lineno));
            if (num_features > 0 && idx > num_features)
                throw std::runtime_error("feature index " + std::to_string(idx) + " exceeds num_features " +
                                         std::to_string(num_features) + " at line " + std::to_string(lineno));
            prev_idx = idx;
            max_index = std::max(max_index, idx);
            row.entries.emplace_back(idx - 1, val);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("no data rows in " + path);

    const int d = num_features > 0 ? num_features : max_index;
    if (d < 1) throw std::runtime_error("cannot determine feature count (no indices seen) in " + path);

    Dataset ds;
    ds.columns.assign(d, std::vector<double>(rows.size(), 0.0));
    ds.labels.resize(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
        ds.labels[r] = rows[r].label;
        for (auto [f, v] : rows[r].entries) ds.columns[f][r] = v;
    }
    ds.validate();
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (int f = 0; f < ds.d(); ++f) {
        const std::string name =
            ds.feature_names.empty() ? "x" + std::to_string(f) : ds.feature_names[f];
        out << name << ',';
    }
    out << "label\n";
    for (int i = 0; i < ds.n(); ++i) {
        for (int f = 0; f < ds.d(); ++f) out << shortest_repr(ds.columns[f][i]) << ',';
        out << ds.labels[i] << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  unsigned long long seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must be in (0,1)");
    const int n = ds.n();
    const int n_train = static_cast<int>(std::floor(n * train_fraction));
    if (n_train < 1 || n_train >= n)
        throw std::runtime_error("split would produce an empty part (n=" + std::to_string(n) +
                                 ", fraction=" + std::to_string(train_fraction) + ")");

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng() % static_cast<unsigned long long>(i + 1));
        std::swap(perm[i], perm[j]);
    }

    auto take = [&](int begin, int end) {
        Dataset part;
        part.feature_names = ds.feature_names;
        part.columns.assign(ds.d(), std::vector<double>(end - begin));
        part.labels.resize(end - begin);
        for (int k = begin; k < end; ++k) {
            const int src = perm[k];
            part.labels[k - begin] = ds.labels[src];
            for (int f = 0; f < ds.d(); ++f) part.columns[f][k - begin] = ds.columns[f][src];
        }
        return part;
    };
    return {take(0, n_train), take(n_train, n)};
}

Dataset make_synthetic_xor(int n, unsigned long long seed) {
    if (n < 4) throw std::invalid_argument("make_synthetic_xor requires n >= 4");
    Dataset ds;
    ds.feature_names = {"x", "y", "z"};
    ds.columns.assign(3, std::vector<double>(n));
    ds.labels.resize(n);

    std::mt19937_64 rng(seed);
    for (int i = 0; i < n; ++i) {
        double x, y;
        do {
            x = 2.0 * unit_draw(rng) - 1.0;
            y = 2.0 * unit_draw(rng) - 1.0;
        } while (std::abs(x * y) < 0.05);  // margin buffer around the decision boundary
        ds.columns[0][i] = x;
        ds.columns[1][i] = y;
        ds.columns[2][i] = x + y;
        ds.labels[i] = x * y > 0.0 ? +1 : -1;
    }
    return ds;
}

}  // namespace gbfs

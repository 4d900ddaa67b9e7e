#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gbfs {

// Column-major dataset with binary labels stored as -1/+1.
struct Dataset {
    std::vector<std::vector<double>> columns;  // d columns, each of length n
    std::vector<int> labels;                   // one of {-1, +1} per row
    std::vector<std::string> feature_names;    // empty, or exactly d entries

    int n() const { return static_cast<int>(labels.size()); }
    int d() const { return static_cast<int>(columns.size()); }

    double value(int row, int feature) const { return columns[feature][row]; }
    const std::vector<double>& column(int feature) const { return columns[feature]; }
    std::vector<double> row(int i) const;

    // Throws std::runtime_error naming the first violated invariant.
    void validate() const;
};

// CSV loader. `label_column` is a column name (requires a header row) or a
// 0-based column index given as digits. A header row is assumed present iff
// the first line contains any non-numeric cell. Raw labels may be {0,1}
// (0 maps to -1) or {-1,+1}.
Dataset load_csv(const std::string& path, const std::string& label_column = "label");

// LIBSVM loader: `label idx:val ...` lines with 1-based strictly increasing
// indices, '#' starting a comment. Unlisted entries are 0. The feature count
// is `num_features` when positive, otherwise the largest index seen.
Dataset load_libsvm(const std::string& path, int num_features = 0);

// Writes header (feature names or x0..x{d-1}, then "label") plus one row per
// sample. Values are printed in shortest round-trip form.
void save_csv(const Dataset& ds, const std::string& path);

// Deterministic shuffled split; the train part holds floor(n * train_fraction)
// rows. Throws if either part would be empty.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  unsigned long long seed);

// Three-feature synthetic set: x,y uniform on [-1,1] with rows rejected while
// |x*y| < 0.05, label = sign(x*y), z = x + y.
Dataset make_synthetic_xor(int n, unsigned long long seed);

}  // namespace gbfs

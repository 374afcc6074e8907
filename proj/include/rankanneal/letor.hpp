#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankanneal {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One query-document pair as read from the file, before densified storage.
struct Document {
  std::vector<double> features;  // dense, indexed 0..n-1 for feature ids 1..n
  int relevance = 0;
  std::string doc_id;
};

struct QueryGroup {
  std::string query_id;
  Eigen::MatrixXd features;  // docs x n_features, file order preserved
  Eigen::VectorXi relevance;
  std::vector<std::string> doc_ids;

  Eigen::Index doc_count() const { return features.rows(); }
  Document document(Eigen::Index d) const;
};

enum class Split { train, validation, test };

std::string to_string(Split split);

struct RankingDataset {
  int n_features = 0;
  std::vector<QueryGroup> groups;
  Split split = Split::train;

  std::size_t doc_count() const;
};

// Parses the LETOR/SVMLight text format:
//   <rel> qid:<q> <fid>:<val> ... # comment
// Lines are grouped by qid even when non-contiguous; file order is kept
// within each group. Missing feature ids densify to 0.0. The comment, when
// present, becomes the doc_id; otherwise "<qid>-<ordinal>" is synthesized.
RankingDataset parse_letor(std::istream& in,
                           std::optional<int> declared_n = std::nullopt,
                           Split split = Split::train);

void serialize_letor(const RankingDataset& dataset, std::ostream& out);

struct FoldData {
  RankingDataset train;
  RankingDataset validation;
  RankingDataset test;

  int n_features() const { return train.n_features; }
};

// Loads train.txt / vali.txt / test.txt from a fold directory; all three must
// agree on dimensionality.
FoldData load_split_dir(const std::filesystem::path& dir);

// Content hash of the three split files, used to key resumable run records.
std::uint64_t fold_content_hash(const std::filesystem::path& dir);

}  // namespace rankanneal

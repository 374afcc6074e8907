#include "rankanneal/letor.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "rankanneal/rng.hpp"
#include "rankanneal/util.hpp"

namespace rankanneal {

namespace {

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

struct ParsedLine {
  int relevance = 0;
  std::string qid;
  std::vector<std::pair<int, double>> entries;  // (fid, value)
  std::string comment;
};

// nullopt means the line holds no data (blank or comment-only).
std::optional<ParsedLine> parse_line(std::string_view line,
                                     std::size_t line_no) {
  ParsedLine out;
  if (auto hash = line.find('#'); hash != std::string_view::npos) {
    out.comment = std::string(trim(line.substr(hash + 1)));
    line = line.substr(0, hash);
  }
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    if (end > pos) tokens.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  if (tokens.empty()) return std::nullopt;
  if (tokens.size() < 2) fail_line(line_no, "expected '<rel> qid:<q> ...'");

  auto rel_tok = tokens[0];
  auto [rel_end, rel_ec] = std::from_chars(
      rel_tok.data(), rel_tok.data() + rel_tok.size(), out.relevance);
  if (rel_ec != std::errc{} || rel_end != rel_tok.data() + rel_tok.size())
    fail_line(line_no, "relevance is not an integer: '" + std::string(rel_tok) + "'");
  if (out.relevance < 0) fail_line(line_no, "relevance must be >= 0");

  auto qid_tok = tokens[1];
  if (!qid_tok.starts_with("qid:") || qid_tok.size() == 4)
    fail_line(line_no, "expected qid:<q>, got '" + std::string(qid_tok) + "'");
  out.qid = std::string(qid_tok.substr(4));

  for (std::size_t t = 2; t < tokens.size(); ++t) {
    auto tok = tokens[t];
    auto colon = tok.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
      fail_line(line_no, "expected <fid>:<val>, got '" + std::string(tok) + "'");
    int fid = 0;
    auto [f_end, f_ec] = std::from_chars(tok.data(), tok.data() + colon, fid);
    if (f_ec != std::errc{} || f_end != tok.data() + colon || fid <= 0)
      fail_line(line_no, "feature id must be a positive integer in '" +
                             std::string(tok) + "'");
    auto val_tok = tok.substr(colon + 1);
    double value = 0.0;
    auto [v_end, v_ec] = std::from_chars(
        val_tok.data(), val_tok.data() + val_tok.size(), value);
    if (v_ec != std::errc{} || v_end != val_tok.data() + val_tok.size())
      fail_line(line_no, "feature value is not a number in '" +
                             std::string(tok) + "'");
    out.entries.emplace_back(fid, value);
  }
  return out;
}

}  // namespace

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

Document QueryGroup::document(Eigen::Index d) const {
  Document doc;
  doc.features.assign(features.row(d).begin(), features.row(d).end());
  doc.relevance = relevance(d);
  doc.doc_id = doc_ids[static_cast<std::size_t>(d)];
  return doc;
}

std::size_t RankingDataset::doc_count() const {
  std::size_t total = 0;
  for (const auto& g : groups) total += static_cast<std::size_t>(g.doc_count());
  return total;
}

RankingDataset parse_letor(std::istream& in, std::optional<int> declared_n,
                           Split split) {
  if (declared_n && *declared_n < 2)
    throw DataError("declared feature count must be >= 2");

  struct PendingGroup {
    std::string qid;
    std::vector<ParsedLine> lines;
  };
  std::vector<PendingGroup> order;
  std::map<std::string, std::size_t> group_index;

  int max_fid = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    auto maybe = parse_line(raw, line_no);
    if (!maybe) continue;
    ParsedLine parsed = std::move(*maybe);
    for (auto& [fid, value] : parsed.entries) {
      if (declared_n && fid > *declared_n)
        fail_line(line_no, "feature id " + std::to_string(fid) +
                               " exceeds declared n=" + std::to_string(*declared_n));
      max_fid = std::max(max_fid, fid);
    }
    auto [it, inserted] = group_index.try_emplace(parsed.qid, order.size());
    if (inserted) order.push_back({parsed.qid, {}});
    order[it->second].lines.push_back(std::move(parsed));
  }

  const int n = declared_n ? *declared_n : max_fid;
  if (n < 2)
    throw DataError(declared_n
                        ? "feature count must be >= 2"
                        : "cannot infer feature count (no data lines with "
                          "feature ids >= 2); pass a declared n");

  RankingDataset ds;
  ds.n_features = n;
  ds.split = split;
  ds.groups.reserve(order.size());
  for (auto& pending : order) {
    QueryGroup group;
    group.query_id = pending.qid;
    const auto docs = static_cast<Eigen::Index>(pending.lines.size());
    group.features = Eigen::MatrixXd::Zero(docs, n);
    group.relevance.resize(docs);
    group.doc_ids.reserve(pending.lines.size());
    for (Eigen::Index d = 0; d < docs; ++d) {
      auto& line = pending.lines[static_cast<std::size_t>(d)];
      for (auto& [fid, value] : line.entries)
        group.features(d, fid - 1) = value;
      group.relevance(d) = line.relevance;
      group.doc_ids.push_back(line.comment.empty()
                                  ? pending.qid + "-" + std::to_string(d)
                                  : line.comment);
    }
    ds.groups.push_back(std::move(group));
  }
  return ds;
}

void serialize_letor(const RankingDataset& dataset, std::ostream& out) {
  for (const auto& group : dataset.groups) {
    for (Eigen::Index d = 0; d < group.doc_count(); ++d) {
      out << group.relevance(d) << " qid:" << group.query_id;
      for (int f = 0; f < dataset.n_features; ++f)
        out << ' ' << f + 1 << ':' << fmt_double(group.features(d, f));
      out << " # " << group.doc_ids[static_cast<std::size_t>(d)] << '\n';
    }
  }
}

FoldData load_split_dir(const std::filesystem::path& dir) {
  const std::pair<const char*, Split> parts[] = {
      {"train.txt", Split::train},
      {"vali.txt", Split::validation},
      {"test.txt", Split::test},
  };
  FoldData fold;
  RankingDataset* slots[] = {&fold.train, &fold.validation, &fold.test};
  for (int i = 0; i < 3; ++i) {
    const auto path = dir / parts[i].first;
    std::ifstream in(path);
    if (!in)
      throw DataError("missing split file: " + path.string());
    try {
      *slots[i] = parse_letor(in, std::nullopt, parts[i].second);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }
  if (fold.train.n_features != fold.validation.n_features ||
      fold.train.n_features != fold.test.n_features)
    throw DataError("feature dimensionality differs across splits: train=" +
                    std::to_string(fold.train.n_features) + " vali=" +
                    std::to_string(fold.validation.n_features) + " test=" +
                    std::to_string(fold.test.n_features));
  return fold;
}

std::uint64_t fold_content_hash(const std::filesystem::path& dir) {
  std::uint64_t h = 0x9ae16a3b2f90404fULL;
  for (const char* name : {"train.txt", "vali.txt", "test.txt"}) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw DataError("missing split file: " + (dir / name).string());
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
      const auto got = static_cast<std::size_t>(in.gcount());
      for (std::size_t i = 0; i < got; ++i)
        h = SplitRng::mix(h, static_cast<unsigned char>(buf[i]) + (h << 1));
      if (!in) break;
    }
    h = SplitRng::mix(h, 0xfeedULL);
  }
  return h;
}

}  // namespace rankanneal

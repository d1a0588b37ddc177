#include "curekit/corpus/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace curekit::corpus {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace

PatchExample tokenize_record(const PatchRecord& rec, const tok::Codec& codec) {
  std::vector<std::string> lines = split_lines(rec.context);
  int n = static_cast<int>(lines.size());
  if (rec.buggy_start_line < 1 || rec.buggy_end_line < rec.buggy_start_line ||
      rec.buggy_end_line > n) {
    throw SpanNotFound("buggy line range " + std::to_string(rec.buggy_start_line) + ".." +
                       std::to_string(rec.buggy_end_line) + " does not address a context of " +
                       std::to_string(n) + " lines");
  }

  PatchExample ex;
  ex.context_ids.push_back(tok::kBosId);
  size_t span_start = 0, span_end = 0;
  bool span_open = false;
  for (int li = 0; li < n; ++li) {
    tok::TokenSeq words = tok::word_tokenize(lines[static_cast<size_t>(li)]);
    std::vector<int> ids = codec.encode(words);
    if (li + 1 == rec.buggy_start_line) {
      span_start = ex.context_ids.size();
      span_open = true;
    }
    ex.context_ids.insert(ex.context_ids.end(), ids.begin(), ids.end());
    for (auto& d : words.donors) ex.context_donors.push_back(d);
    if (li + 1 == rec.buggy_end_line) {
      span_end = ex.context_ids.size();  // one past the last buggy subword
      span_open = false;
    }
  }
  (void)span_open;
  ex.context_ids.push_back(tok::kEosId);
  if (span_end <= span_start) {
    throw SpanNotFound("buggy lines " + std::to_string(rec.buggy_start_line) + ".." +
                       std::to_string(rec.buggy_end_line) + " contain no tokens");
  }
  ex.b1 = span_start;
  ex.bn = span_end - 1;

  tok::TokenSeq fix_words;
  for (const auto& line : split_lines(rec.fix)) {
    tok::TokenSeq w = tok::word_tokenize(line);
    fix_words.tokens.insert(fix_words.tokens.end(), w.tokens.begin(), w.tokens.end());
    fix_words.donors.insert(fix_words.donors.end(), w.donors.begin(), w.donors.end());
  }
  ex.fix_ids = codec.encode(fix_words);
  ex.fix_ids.push_back(tok::kEosId);
  ex.fix_donors = fix_words.donors;
  return ex;
}

std::vector<PatchExample> build_patch_dataset(const std::vector<PatchRecord>& records,
                                              const tok::Codec& codec, size_t max_tokens) {
  std::vector<PatchExample> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    PatchExample ex = tokenize_record(rec, codec);
    size_t context_content = ex.context_ids.size() - 2;  // minus <BOS>/<EOS>
    if (context_content > max_tokens || ex.fix_len() > max_tokens) continue;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::vector<int>> build_lm_dataset(const std::vector<std::string>& methods,
                                               const tok::Codec& codec, size_t max_tokens) {
  std::vector<std::vector<int>> out;
  out.reserve(methods.size());
  for (const auto& m : methods) {
    std::vector<int> ids;
    ids.push_back(tok::kBosId);
    for (const auto& line : split_lines(m)) {
      std::vector<int> line_ids = codec.encode(tok::word_tokenize(line));
      ids.insert(ids.end(), line_ids.begin(), line_ids.end());
    }
    if (ids.size() - 1 > max_tokens) continue;
    ids.push_back(tok::kEosId);
    out.push_back(std::move(ids));
  }
  return out;
}

LengthModel length_diff_distribution(const std::vector<PatchExample>& dataset) {
  if (dataset.empty()) throw EmptyDataset("length model needs at least one patch example");
  std::map<int64_t, size_t> counts;
  for (const auto& ex : dataset) {
    int64_t d = static_cast<int64_t>(ex.buggy_len()) - static_cast<int64_t>(ex.fix_len());
    counts[d] += 1;
  }
  LengthModel lm;
  double n = static_cast<double>(dataset.size());
  for (const auto& [d, c] : counts) lm.table[d] = std::log(static_cast<double>(c) / n);
  lm.floor_logp = std::log(0.5 / n);
  return lm;
}

std::vector<PatchRecord> parse_patch_records(const std::string& jsonl) {
  std::vector<PatchRecord> out;
  std::istringstream in(jsonl);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("patch record line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("context") || !j.contains("buggy_start_line") ||
        !j.contains("buggy_end_line") || !j.contains("fix") || !j["context"].is_string() ||
        !j["buggy_start_line"].is_number_integer() || !j["buggy_end_line"].is_number_integer() ||
        !j["fix"].is_string()) {
      throw DataError("patch record line " + std::to_string(lineno) +
                      ": need {context, buggy_start_line, buggy_end_line, fix}");
    }
    PatchRecord r;
    r.context = j["context"].get<std::string>();
    r.buggy_start_line = j["buggy_start_line"].get<int>();
    r.buggy_end_line = j["buggy_end_line"].get<int>();
    r.fix = j["fix"].get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PatchRecord> load_patch_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open patch record file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_patch_records(ss.str());
}

void save_length_model(const std::string& path, const LengthModel& lm) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write length model file: " + path);
  nlohmann::ordered_json j;
  j["floor_logp"] = lm.floor_logp;
  nlohmann::ordered_json table = nlohmann::ordered_json::object();
  for (const auto& [d, logp] : lm.table) table[std::to_string(d)] = logp;
  j["table"] = table;
  out << j.dump(2) << "\n";
}

LengthModel load_length_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open length model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("length model file " + path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("floor_logp") || !j.contains("table") ||
      !j["table"].is_object()) {
    throw DataError("length model file " + path + ": need {floor_logp, table}");
  }
  LengthModel lm;
  lm.floor_logp = j["floor_logp"].get<double>();
  for (const auto& [key, val] : j["table"].items()) {
    lm.table[std::stoll(key)] = val.get<double>();
  }
  return lm;
}

void save_patch_records(const std::string& path, const std::vector<PatchRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write patch record file: " + path);
  for (const auto& r : records) {
    nlohmann::json j;
    j["context"] = r.context;
    j["buggy_start_line"] = r.buggy_start_line;
    j["buggy_end_line"] = r.buggy_end_line;
    j["fix"] = r.fix;
    out << j.dump() << "\n";
  }
}

}  // namespace curekit::corpus

#include "ldaselect/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ldaselect/csv.hpp"
#include "ldaselect/errors.hpp"

namespace ldaselect {

Corpus::Corpus(Vocabulary vocab, std::vector<std::vector<CountEntry>> docs)
    : vocab_(std::move(vocab)), docs_(std::move(docs)) {
  if (vocab_.size() < 1) throw ValidationError("corpus vocabulary is empty");
  if (docs_.empty()) throw ValidationError("no documents");
  doc_lengths_.resize(docs_.size());
  postings_.resize(static_cast<std::size_t>(vocab_.size()));
  for (std::size_t j = 0; j < docs_.size(); ++j) {
    auto& doc = docs_[j];
    std::sort(doc.begin(), doc.end(),
              [](const CountEntry& a, const CountEntry& b) { return a.word < b.word; });
    // merge duplicate word ids
    std::vector<CountEntry> merged;
    merged.reserve(doc.size());
    for (const auto& e : doc) {
      if (e.word < 0 || e.word >= vocab_.size())
        throw ValidationError("word id " + std::to_string(e.word) + " out of range in document " +
                              std::to_string(j));
      if (e.count < 0)
        throw ValidationError("negative count for word " + std::to_string(e.word) +
                              " in document " + std::to_string(j));
      if (e.count == 0) continue;
      if (!merged.empty() && merged.back().word == e.word)
        merged.back().count += e.count;
      else
        merged.push_back(e);
    }
    doc = std::move(merged);
    long len = 0;
    for (const auto& e : doc) {
      len += e.count;
      postings_[static_cast<std::size_t>(e.word)].push_back(static_cast<int>(j));
    }
    if (len == 0) throw ValidationError("document " + std::to_string(j) + " has no tokens");
    doc_lengths_[j] = len;
    total_words_ += len;
  }
}

namespace {

std::vector<std::string> split_whitespace(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

Corpus load_token_lists(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path.string());
  Vocabulary vocab;
  std::vector<std::vector<CountEntry>> docs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tokens = split_whitespace(line);
    if (tokens.empty())
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": document has no tokens");
    std::vector<CountEntry> doc;
    for (const auto& t : tokens) doc.push_back({vocab.add(t), 1});
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw ValidationError("no documents in " + path.string());
  return Corpus(std::move(vocab), std::move(docs));
}

Corpus load_sparse_triplets(const std::filesystem::path& path) {
  auto vocab_path = vocab_sidecar_path(path);
  auto vocab_lines = read_lines(vocab_path);
  if (vocab_lines.empty()) throw ValidationError("empty vocabulary sidecar: " + vocab_path.string());
  Vocabulary vocab(std::move(vocab_lines));

  auto lines = read_lines(path);
  if (lines.empty()) throw ValidationError("no documents in " + path.string());
  if (lines[0] != "doc,word,count")
    throw ValidationError(path.string() + ":1: expected header 'doc,word,count'");

  long max_doc = -1;
  std::vector<std::tuple<long, long, long>> triplets;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    auto fields = split_csv_line(lines[i]);
    if (fields.size() != 3) throw ValidationError(where + ": expected 3 fields");
    long doc = parse_long_field(fields[0], where);
    long word = parse_long_field(fields[1], where);
    long count = parse_long_field(fields[2], where);
    if (doc < 0) throw ValidationError(where + ": negative document id");
    if (word < 0 || word >= vocab.size())
      throw ValidationError(where + ": word id " + std::to_string(word) + " out of range [0," +
                            std::to_string(vocab.size()) + ")");
    if (count < 0) throw ValidationError(where + ": negative count");
    max_doc = std::max(max_doc, doc);
    triplets.emplace_back(doc, word, count);
  }
  if (max_doc < 0) throw ValidationError("no documents in " + path.string());

  std::vector<std::vector<CountEntry>> docs(static_cast<std::size_t>(max_doc + 1));
  for (const auto& [doc, word, count] : triplets)
    docs[static_cast<std::size_t>(doc)].push_back({static_cast<int>(word), count});
  return Corpus(std::move(vocab), std::move(docs));
}

}  // namespace

std::filesystem::path vocab_sidecar_path(const std::filesystem::path& triplets_path) {
  auto p = triplets_path;
  p.replace_extension(".vocab");
  return p;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  switch (format) {
    case CorpusFormat::token_lists:
      return load_token_lists(path);
    case CorpusFormat::sparse_triplets:
      return load_sparse_triplets(path);
  }
  throw ValidationError("unknown corpus format");
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format) {
  if (format == CorpusFormat::token_lists) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write corpus file: " + path.string());
    // Tokens are emitted in word-id order, which reproduces the original
    // id assignment when the file is re-read in first-appearance order.
    for (int j = 0; j < corpus.num_docs(); ++j) {
      bool first = true;
      for (const auto& e : corpus.doc(j)) {
        for (long c = 0; c < e.count; ++c) {
          if (!first) out << ' ';
          out << corpus.vocab().token(e.word);
          first = false;
        }
      }
      out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
    return;
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file: " + path.string());
  out << "doc,word,count\n";
  for (int j = 0; j < corpus.num_docs(); ++j)
    for (const auto& e : corpus.doc(j)) out << j << ',' << e.word << ',' << e.count << '\n';
  if (!out) throw IoError("write failed: " + path.string());

  std::ofstream vout(vocab_sidecar_path(path));
  if (!vout) throw IoError("cannot write vocabulary sidecar");
  for (const auto& t : corpus.vocab().tokens()) vout << t << '\n';
  if (!vout) throw IoError("write failed: vocabulary sidecar");
}

CoDocFrequencies co_document_frequencies(const Corpus& corpus, const std::vector<int>& words) {
  CoDocFrequencies out;
  for (int w : words) {
    if (w < 0 || w >= corpus.vocab_size())
      throw ValidationError("word id " + std::to_string(w) + " out of range");
    out.doc_freq[w] = static_cast<long>(corpus.docs_containing(w).size());
  }
  for (std::size_t a = 0; a < words.size(); ++a) {
    for (std::size_t b = a; b < words.size(); ++b) {
      int i = std::min(words[a], words[b]);
      int j = std::max(words[a], words[b]);
      if (out.co_doc_freq.count({i, j})) continue;
      if (i == j) {
        out.co_doc_freq[{i, j}] = out.doc_freq[i];
        continue;
      }
      const auto& di = corpus.docs_containing(i);
      const auto& dj = corpus.docs_containing(j);
      long n = 0;
      auto it = di.begin();
      auto jt = dj.begin();
      while (it != di.end() && jt != dj.end()) {
        if (*it < *jt)
          ++it;
        else if (*jt < *it)
          ++jt;
        else {
          ++n;
          ++it;
          ++jt;
        }
      }
      out.co_doc_freq[{i, j}] = n;
    }
  }
  return out;
}

}  // namespace ldaselect

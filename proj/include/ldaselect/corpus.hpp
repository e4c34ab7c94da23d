#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ldaselect/vocabulary.hpp"

namespace ldaselect {

// One positive cell of the document-word count matrix.
struct CountEntry {
  int word;
  long count;
};

// Bag-of-words corpus: a J x I sparse non-negative count matrix stored
// document-major, with per-word postings for frequency queries.
// Immutable after construction; safe for concurrent reads.
class Corpus {
 public:
  // `docs[j]` holds the positive counts of document j in any order;
  // entries are sorted and merged here. Documents with no tokens are
  // rejected because downstream frequency normalisation divides by N_j.
  Corpus(Vocabulary vocab, std::vector<std::vector<CountEntry>> docs);

  int num_docs() const { return static_cast<int>(docs_.size()); }
  int vocab_size() const { return vocab_.size(); }
  long doc_length(int j) const { return doc_lengths_.at(static_cast<std::size_t>(j)); }
  const std::vector<long>& doc_lengths() const { return doc_lengths_; }
  long long total_words() const { return total_words_; }
  const std::vector<CountEntry>& doc(int j) const { return docs_.at(static_cast<std::size_t>(j)); }
  const Vocabulary& vocab() const { return vocab_; }

  // Sorted ids of the documents containing at least one token of `word`.
  const std::vector<int>& docs_containing(int word) const {
    return postings_.at(static_cast<std::size_t>(word));
  }

 private:
  Vocabulary vocab_;
  std::vector<std::vector<CountEntry>> docs_;
  std::vector<long> doc_lengths_;
  long long total_words_ = 0;
  std::vector<std::vector<int>> postings_;
};

enum class CorpusFormat {
  token_lists,      // UTF-8 text, one document per line, whitespace-separated tokens
  sparse_triplets,  // CSV `doc,word,count` plus a one-token-per-line .vocab sidecar
};

// For sparse_triplets the vocabulary sidecar path is `path` with its
// extension replaced by ".vocab".
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format);
std::filesystem::path vocab_sidecar_path(const std::filesystem::path& triplets_path);

struct CoDocFrequencies {
  // f(i): number of documents with at least one token of type i.
  std::unordered_map<int, long> doc_freq;
  // f(i,i'): number of documents containing both, keyed (min,max); the
  // diagonal is included and equals doc_freq.
  std::map<std::pair<int, int>, long> co_doc_freq;

  long co(int a, int b) const {
    if (a > b) std::swap(a, b);
    return co_doc_freq.at({a, b});
  }
};

CoDocFrequencies co_document_frequencies(const Corpus& corpus, const std::vector<int>& words);

}  // namespace ldaselect

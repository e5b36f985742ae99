// Copyright 2026 The DAPrompt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "daprompt/tokenizer.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "daprompt/errors.h"

namespace daprompt {

namespace {

constexpr const char* kContinuation = "##";

// Splits into UTF-8 code points so multi-byte characters stay whole.
std::vector<std::string> CodePoints(const std::string& word) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < word.size();) {
    const unsigned char c = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
    }
    len = std::min(len, word.size() - i);
    out.push_back(word.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace

Tokenizer::Tokenizer() {
  for (const char* s : {"[PAD]", "[UNK]", kClsWord, kSepWord, kMaskWord}) {
    Insert(s);
  }
  base_size_ = Size();
}

int Tokenizer::Insert(const std::string& piece) {
  auto [it, inserted] = ids_.try_emplace(piece, Size());
  if (inserted) {
    pieces_.push_back(piece);
    max_piece_bytes_ = std::max(max_piece_bytes_, piece.size());
  }
  return it->second;
}

Tokenizer Tokenizer::Build(
    const std::vector<std::vector<std::string>>& sentences,
    const BuildOptions& options) {
  std::map<std::string, int> counts;
  std::set<std::string> chars;
  auto observe = [&](const std::string& w, int weight) {
    counts[w] += weight;
    for (const auto& c : CodePoints(w)) chars.insert(c);
  };
  for (const auto& s : sentences) {
    for (const auto& w : s) observe(w, 1);
  }
  for (const auto& w : options.reserved_words) {
    observe(w, options.min_word_frequency);
  }

  Tokenizer tok;
  // Frequency-descending, then lexicographic, for a stable id assignment.
  std::vector<std::pair<std::string, int>> words(counts.begin(), counts.end());
  std::stable_sort(words.begin(), words.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [w, n] : words) {
    if (n >= options.min_word_frequency) tok.Insert(w);
  }
  for (const auto& c : chars) {
    tok.Insert(c);
    tok.Insert(kContinuation + c);
  }
  tok.base_size_ = tok.Size();
  return tok;
}

int Tokenizer::AddVirtualToken(const std::string& token) {
  if (ids_.count(token)) {
    throw ConfigError("virtual token '" + token +
                      "' collides with an existing vocabulary entry");
  }
  return Insert(token);
}

int Tokenizer::Find(const std::string& piece) const {
  auto it = ids_.find(piece);
  return it == ids_.end() ? -1 : it->second;
}

int Tokenizer::Id(const std::string& piece) const {
  const int id = Find(piece);
  if (id < 0) throw ConfigError("token '" + piece + "' not in vocabulary");
  return id;
}

std::vector<int> Tokenizer::TokenizeWord(const std::string& word) const {
  if (word == kMask1Word || word == kMask2Word) return {kMaskId};
  if (const int id = Find(word); id >= 0) return {id};

  std::vector<int> out;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = std::min(word.size(), start + max_piece_bytes_);
    int found = -1;
    while (end > start) {
      std::string piece = word.substr(start, end - start);
      if (start > 0) piece = kContinuation + piece;
      if (const int id = Find(piece); id >= 0 && !IsVirtual(id)) {
        found = id;
        break;
      }
      --end;
    }
    if (found < 0) return {kUnkId};
    out.push_back(found);
    start = end;
  }
  return out;
}

std::vector<int> Tokenizer::Tokenize(const std::vector<std::string>& words) const {
  std::vector<int> out;
  for (const auto& w : words) {
    const auto ids = TokenizeWord(w);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

std::vector<std::string> Tokenizer::Detokenize(const std::vector<int>& ids) const {
  std::vector<std::string> words;
  for (int id : ids) {
    const std::string& p = Piece(id);
    if (!words.empty() && p.size() > 2 && p.compare(0, 2, kContinuation) == 0) {
      words.back() += p.substr(2);
    } else {
      words.push_back(p);
    }
  }
  return words;
}

void Tokenizer::Save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary " + path.string());
  out << base_size_ << '\n';
  for (const auto& p : pieces_) out << p << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Tokenizer Tokenizer::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open vocabulary " + path.string());
  Tokenizer tok;
  tok.pieces_.clear();
  tok.ids_.clear();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty vocabulary file");
  const int base = std::stoi(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (tok.ids_.count(line)) throw ParseError(line_no, "duplicate piece " + line);
    tok.Insert(line);
  }
  if (base < 5 || base > tok.Size()) {
    throw ParseError(1, "inconsistent base vocabulary size");
  }
  tok.base_size_ = base;
  return tok;
}

}  // namespace daprompt

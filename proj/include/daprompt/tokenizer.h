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

#ifndef DAPROMPT_TOKENIZER_H_
#define DAPROMPT_TOKENIZER_H_

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace daprompt {

// Cased WordPiece vocabulary with greedy longest-match-first segmentation.
// Continuation pieces carry a "##" prefix. Special tokens and virtual tokens
// always map to a single id.
//
// Id layout: specials [0, 5), base pieces [5, BaseSize()), then virtual
// tokens in registration order.
class Tokenizer {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;
  static constexpr int kClsId = 2;
  static constexpr int kSepId = 3;
  static constexpr int kMaskId = 4;

  struct BuildOptions {
    int min_word_frequency = 1;
    // Words that must be whole-word entries regardless of frequency.
    std::vector<std::string> reserved_words;
  };

  Tokenizer();

  // Whole words seen at least `min_word_frequency` times plus every character
  // (both initial and "##" continuation forms) so that any word over the
  // observed alphabet segments without [UNK].
  static Tokenizer Build(const std::vector<std::vector<std::string>>& sentences,
                         const BuildOptions& options);

  int Size() const { return static_cast<int>(pieces_.size()); }
  int BaseSize() const { return base_size_; }
  int NumVirtual() const { return Size() - base_size_; }

  // Throws ConfigError when `token` already exists.
  int AddVirtualToken(const std::string& token);
  bool IsVirtual(int id) const { return id >= base_size_; }

  // -1 when absent.
  int Find(const std::string& piece) const;
  int Id(const std::string& piece) const;
  const std::string& Piece(int id) const { return pieces_.at(id); }

  std::vector<int> TokenizeWord(const std::string& word) const;
  std::vector<int> Tokenize(const std::vector<std::string>& words) const;
  // Inverse of Tokenize for [UNK]-free input.
  std::vector<std::string> Detokenize(const std::vector<int>& ids) const;

  // One piece per line; the first line records the base size.
  void Save(const std::filesystem::path& path) const;
  static Tokenizer Load(const std::filesystem::path& path);

 private:
  int Insert(const std::string& piece);

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> ids_;
  int base_size_ = 0;
  std::size_t max_piece_bytes_ = 0;
};

// Placeholder words understood by the tokenizer.
inline constexpr const char* kClsWord = "[CLS]";
inline constexpr const char* kSepWord = "[SEP]";
inline constexpr const char* kMaskWord = "[MASK]";
inline constexpr const char* kMask1Word = "[MASK1]";
inline constexpr const char* kMask2Word = "[MASK2]";

}  // namespace daprompt

#endif  // DAPROMPT_TOKENIZER_H_

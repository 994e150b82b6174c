// SPDX-License-Identifier: Apache-2.0
#include "forge/text/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "forge/core/array_io.hpp"
#include "forge/corpus/phantom.hpp"

namespace forge {
namespace {

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '\'';
}

char to_lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

/// Acronyms restored by decode; every other word renders lowercase except
/// at sentence starts.
const std::unordered_map<std::string, std::string>& recap_map() {
  static const std::unordered_map<std::string, std::string> m = {
      {"mri", "MRI"}, {"t1", "T1"}, {"t2", "T2"},     {"flair", "FLAIR"},
      {"pd", "PD"},   {"3t", "3T"}, {"1.5t", "1.5T"},
  };
  return m;
}

bool attaches_left(const std::string& t) {
  return t == "." || t == "," || t == ":" || t == ";" || t == "!" || t == "?" || t == ")" ||
         t == "]" || t == "%";
}

bool attaches_right(const std::string& t) { return t == "(" || t == "["; }

bool attaches_both(const std::string& t) { return t == "-" || t == "/"; }

bool starts_sentence_after(const std::string& t) {
  return t == "." || t == "!" || t == "?" || t == ":";
}

}  // namespace

const std::string& special_surface(int id) {
  static const std::vector<std::string> s = {"<pad>", "<bos>",  "<eos>", "<img>",      "<imgslot>",
                                             "</img>", "<seg>", "<bbox>", "<response>", "<unk>"};
  require(id >= 0 && id < kNumSpecials, "not a special token id");
  return s[static_cast<std::size_t>(id)];
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const char raw = text[i];
    if (std::isspace(static_cast<unsigned char>(raw))) {
      ++i;
      continue;
    }
    if (raw == '<') {
      // Try to match a marker form: lowercase run up to the next '>'.
      std::size_t j = i + 1;
      std::string body;
      while (j < n && text[j] != '>' && !std::isspace(static_cast<unsigned char>(text[j])) &&
             body.size() < 12) {
        body.push_back(to_lower(text[j]));
        ++j;
      }
      if (j < n && text[j] == '>') {
        out.push_back("<" + body + ">");
        i = j + 1;
        continue;
      }
      out.push_back("<");
      ++i;
      continue;
    }
    const char c = to_lower(raw);
    if (is_word_char(c)) {
      std::string w;
      while (i < n) {
        const char wc = to_lower(text[i]);
        if (is_word_char(wc)) {
          w.push_back(wc);
          ++i;
        } else if (wc == '.' && !w.empty() && std::isdigit(static_cast<unsigned char>(w.back())) &&
                   i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
          w.push_back('.');
          ++i;
        } else {
          break;
        }
      }
      out.push_back(w);
      continue;
    }
    out.push_back(std::string(1, c));
    ++i;
  }
  return out;
}

void Vocabulary::add(const std::string& token) {
  if (token_to_id_.count(token)) return;
  token_to_id_[token] = static_cast<int>(id_to_token_.size());
  id_to_token_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts) {
  require(!texts.empty(), "build_vocab requires a non-empty corpus");
  Vocabulary v;
  for (int s = 0; s < kNumSpecials; ++s) v.add(special_surface(s));
  for (int b = 0; b < kNumBins; ++b) v.add("<bin" + std::to_string(b) + ">");
  // Class-label tokens are registered up front so encode_bbox never
  // depends on which lesions happen to appear in the sampled corpus.
  for (int t = 1; t <= 10; ++t) v.add(lesion_token(static_cast<LesionType>(t)));

  std::set<std::string> words;
  for (const std::string& text : texts)
    for (const std::string& w : split_words(text))
      if (!v.token_to_id_.count(w)) words.insert(w);
  for (const std::string& w : words) v.add(w);
  return v;
}

bool Vocabulary::contains(const std::string& token) const { return token_to_id_.count(token) > 0; }

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  require(id >= 0 && id < size(), "token id out of range: " + std::to_string(id));
  return id_to_token_[static_cast<std::size_t>(id)];
}

int Vocabulary::bin_id(int bin) {
  require(bin >= 0 && bin < kNumBins, "coordinate bin out of range");
  return kNumSpecials + bin;
}

int Vocabulary::bin_value(int id) {
  require(is_bin(id), "token id is not a coordinate bin");
  return id - kNumSpecials;
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const std::string& w : split_words(text)) ids.push_back(id(w));
  return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  bool sentence_start = true;
  bool suppress_space = true;  // no leading space
  for (int raw_id : ids) {
    std::string t = token(raw_id);
    const bool left = attaches_left(t);
    const bool both = attaches_both(t);
    if (!out.empty() && !left && !both && !suppress_space) out.push_back(' ');

    if (!is_special(raw_id) && !is_bin(raw_id)) {
      auto it = recap_map().find(t);
      if (it != recap_map().end()) {
        t = it->second;
      } else if (sentence_start && std::islower(static_cast<unsigned char>(t[0]))) {
        t[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
      }
    }
    out += t;

    suppress_space = attaches_right(t) || both;
    if (t.size() == 1 && (left || both || attaches_right(t))) {
      sentence_start = starts_sentence_after(t);
    } else if (!is_special(raw_id) && !is_bin(raw_id)) {
      sentence_start = false;
    }
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ostringstream os;
  for (int i = 0; i < size(); ++i) os << id_to_token_[static_cast<std::size_t>(i)] << '\t' << i << '\n';
  write_text_file(path, os.str());
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path);
  Vocabulary v;
  std::string line;
  int expect = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    require(tab != std::string::npos, "malformed vocabulary line: " + line);
    const std::string token = line.substr(0, tab);
    const int id = std::stoi(line.substr(tab + 1));
    require(id == expect, "vocabulary ids not dense from 0 in " + path);
    v.add(token);
    ++expect;
  }
  require(v.size() > kNumSpecials + kNumBins, "vocabulary file too small: " + path);
  return v;
}

std::uint64_t Vocabulary::hash() const {
  std::string blob;
  for (const std::string& t : id_to_token_) {
    blob += t;
    blob.push_back('\n');
  }
  return fnv1a(blob.data(), blob.size());
}

}  // namespace forge

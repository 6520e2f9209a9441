#include "tpsfilter/seqio.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "tpsfilter/error.hpp"

namespace tpsf {

namespace {

constexpr std::array<bool, 256> make_canonical_table() {
  std::array<bool, 256> table{};
  for (char c : kCanonicalResidues) table[static_cast<unsigned char>(c)] = true;
  return table;
}

constexpr auto kCanonicalTable = make_canonical_table();

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (is_blank(s.front()) || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (is_blank(s.back()) || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Pending {
  ProteinSequence seq;
  std::size_t header_line = 0;
};

}  // namespace

bool is_canonical_residue(char c) noexcept { return kCanonicalTable[static_cast<unsigned char>(c)]; }

bool is_allowed_residue(char c, AlphabetMode mode) noexcept {
  return is_canonical_residue(c) || (mode == AlphabetMode::Lenient && c == 'X');
}

void SequenceSet::add(ProteinSequence seq) {
  auto [it, inserted] = index_.emplace(seq.id, seqs_.size());
  if (!inserted) throw Error(ErrorKind::DuplicateId, seq.id);
  seqs_.push_back(std::move(seq));
}

const ProteinSequence* SequenceSet::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &seqs_[it->second];
}

SequenceSet parse_fasta(std::string_view text, AlphabetMode mode, std::string source) {
  SequenceSet out(std::move(source));
  Pending current;
  bool have_record = false;

  auto flush = [&]() {
    if (!have_record) return;
    if (current.seq.residues.empty()) throw Error(ErrorKind::EmptySequence, current.seq.id);
    out.add(std::move(current.seq));
    current = Pending{};
    have_record = false;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!line.empty() && line.front() == '>') {
      flush();
      if (line.size() > kMaxHeaderBytes) {
        throw Error(ErrorKind::MalformedHeader,
                    "line " + std::to_string(line_no) + ": header exceeds 1 MiB");
      }
      std::string_view header = line.substr(1);
      std::size_t start = 0;
      while (start < header.size() && is_blank(header[start])) ++start;
      // The id must follow '>' directly.
      if (start != 0 || header.empty()) {
        throw Error(ErrorKind::MalformedHeader, "line " + std::to_string(line_no) + ": missing id");
      }
      std::size_t end = start;
      while (end < header.size() && !is_blank(header[end])) ++end;
      current.seq.id = std::string(header.substr(start, end - start));
      current.seq.description = std::string(trim(header.substr(end)));
      current.header_line = line_no;
      have_record = true;
      continue;
    }

    if (trim(line).empty()) continue;
    if (!have_record) {
      throw Error(ErrorKind::MalformedHeader,
                  "line " + std::to_string(line_no) + ": sequence data before first header");
    }
    auto& residues = current.seq.residues;
    for (char raw : line) {
      if (is_blank(raw)) continue;
      char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
      if (!is_allowed_residue(c, mode)) {
        std::string shown = std::isprint(static_cast<unsigned char>(raw))
                                ? std::string(1, raw)
                                : "\\x" + std::to_string(static_cast<unsigned char>(raw));
        throw Error(ErrorKind::IllegalResidue, current.seq.id + " position " +
                                                   std::to_string(residues.size()) + " char '" +
                                                   shown + "'");
      }
      residues.push_back(c);
    }
  }
  flush();
  return out;
}

SequenceSet read_fasta_file(const std::string& path, AlphabetMode mode) {
  return parse_fasta(read_text_file(path), mode, path);
}

std::string write_fasta(const SequenceSet& set, std::size_t wrap) {
  if (wrap == 0) wrap = 1;
  std::string out;
  for (const auto& seq : set) {
    out += '>';
    out += seq.id;
    if (!seq.description.empty()) {
      out += ' ';
      out += seq.description;
    }
    out += '\n';
    for (std::size_t i = 0; i < seq.residues.size(); i += wrap) {
      out.append(seq.residues, i, wrap);
      out += '\n';
    }
  }
  return out;
}

void write_fasta_file(const SequenceSet& set, const std::string& path, std::size_t wrap) {
  write_text_file(path, write_fasta(set, wrap));
}

SequenceSet length_filter(const SequenceSet& set, std::size_t min_len, std::size_t max_len) {
  if (min_len == 0 || min_len > max_len) {
    throw Error(ErrorKind::InvalidRange,
                "[" + std::to_string(min_len) + ", " + std::to_string(max_len) + "]");
  }
  SequenceSet out(set.source());
  for (const auto& seq : set) {
    if (seq.length() >= min_len && seq.length() <= max_len) out.add(seq);
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IoError, "read failed: " + path);
  return std::move(buf).str();
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot create " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + path);
}

}  // namespace tpsf

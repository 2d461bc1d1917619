#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace callsum {

struct TokenSpan {
    std::size_t begin;
    std::size_t end;
};

struct BpeModel;

/// Token counter used for budgets and corpus statistics.
///
/// Two modes exist. `bpe` is GPT-2 style byte-level BPE loaded from an
/// `encoder.json` vocabulary and a `vocab.bpe` merge list. `fallback` splits
/// on whitespace, keeps identifier/number runs together and makes every other
/// character its own token; it needs no files and marks dependent statistics
/// as approximate. Instances are immutable and safe to share across threads.
class Tokenizer {
public:
    static Tokenizer fallback();
    static Tokenizer from_files(const std::filesystem::path& vocab_json,
                                const std::filesystem::path& merges_file);
    /// BPE from an in-memory merge list (pairs in byte-to-unicode form, rank order).
    static Tokenizer from_merges(const std::vector<std::pair<std::string, std::string>>& merges);

    bool exact() const { return bpe_ != nullptr; }
    std::string mode() const { return exact() ? "bpe" : "fallback"; }

    std::size_t count(std::string_view text) const;
    /// Byte ranges of every token, in order, covering all non-dropped bytes.
    std::vector<TokenSpan> spans(std::string_view text) const;

private:
    std::shared_ptr<const BpeModel> bpe_;
};

/// GPT-2 pre-tokenization (contractions, letter runs, digit runs, symbol
/// runs, whitespace) over bytes. Non-ASCII bytes count as letters.
std::vector<TokenSpan> gpt2_pretokenize(std::string_view text);

/// The GPT-2 byte-to-unicode table: UTF-8 encoding of the symbol standing
/// for each byte value.
const std::vector<std::string>& gpt2_byte_symbols();

}  // namespace callsum

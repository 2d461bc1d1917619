#include "callsum/tokenizer.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "callsum/error.hpp"

namespace callsum {

struct BpeModel {
    struct PairHash {
        std::size_t operator()(const std::pair<std::string, std::string>& p) const
        {
            return std::hash<std::string>{}(p.first) * 31 + std::hash<std::string>{}(p.second);
        }
    };
    std::unordered_map<std::pair<std::string, std::string>, int, PairHash> ranks;
};

namespace {

bool is_letter(unsigned char c) { return std::isalpha(c) || c >= 0x80; }
bool is_digit(unsigned char c) { return std::isdigit(c) != 0; }
bool is_space(unsigned char c) { return std::isspace(c) != 0; }

std::string utf8_encode(unsigned int cp)
{
    std::string out;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    return out;
}

struct Symbol {
    std::string text;
    std::size_t bytes;
    int prev;
    int next;
    bool alive;
};

// Heap-driven merge: repeatedly applies the lowest-ranked adjacent pair.
void bpe_word(const BpeModel& model, std::string_view word, std::size_t base,
              std::vector<TokenSpan>& out)
{
    const auto& table = gpt2_byte_symbols();
    std::vector<Symbol> syms;
    syms.reserve(word.size());
    for (std::size_t i = 0; i < word.size(); ++i) {
        syms.push_back(Symbol{table[static_cast<unsigned char>(word[i])], 1, static_cast<int>(i) - 1,
                              i + 1 < word.size() ? static_cast<int>(i) + 1 : -1, true});
    }

    struct Cand {
        int rank;
        int left;
        std::string joined;
        bool operator>(const Cand& o) const
        {
            return rank != o.rank ? rank > o.rank : left > o.left;
        }
    };
    std::priority_queue<Cand, std::vector<Cand>, std::greater<>> heap;
    auto consider = [&](int left) {
        if (left < 0) return;
        const int right = syms[left].next;
        if (right < 0) return;
        auto it = model.ranks.find({syms[left].text, syms[right].text});
        if (it != model.ranks.end()) {
            heap.push(Cand{it->second, left, syms[left].text + syms[right].text});
        }
    };
    for (int i = 0; i + 1 < static_cast<int>(syms.size()); ++i) consider(i);

    while (!heap.empty()) {
        Cand c = heap.top();
        heap.pop();
        Symbol& l = syms[c.left];
        if (!l.alive || l.next < 0) continue;
        Symbol& r = syms[l.next];
        if (l.text + r.text != c.joined) continue;  // stale entry
        l.text = std::move(c.joined);
        l.bytes += r.bytes;
        r.alive = false;
        l.next = r.next;
        if (r.next >= 0) syms[r.next].prev = c.left;
        consider(l.prev);
        consider(c.left);
    }

    std::size_t pos = base;
    for (int i = 0; i >= 0 && i < static_cast<int>(syms.size()); i = syms[i].next) {
        out.push_back(TokenSpan{pos, pos + syms[i].bytes});
        pos += syms[i].bytes;
    }
}

}  // namespace

const std::vector<std::string>& gpt2_byte_symbols()
{
    static const std::vector<std::string> table = [] {
        std::vector<std::string> t(256);
        std::vector<bool> direct(256, false);
        for (int b = '!'; b <= '~'; ++b) direct[b] = true;
        for (int b = 0xA1; b <= 0xAC; ++b) direct[b] = true;
        for (int b = 0xAE; b <= 0xFF; ++b) direct[b] = true;
        unsigned int extra = 0;
        for (int b = 0; b < 256; ++b) {
            t[b] = utf8_encode(direct[b] ? static_cast<unsigned int>(b) : 256 + extra++);
        }
        return t;
    }();
    return table;
}

std::vector<TokenSpan> gpt2_pretokenize(std::string_view s)
{
    std::vector<TokenSpan> out;
    const std::size_t n = s.size();
    auto at = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    std::size_t i = 0;
    while (i < n) {
        if (s[i] == '\'') {
            bool hit = false;
            for (std::string_view c : {"'s", "'t", "'re", "'ve", "'m", "'ll", "'d"}) {
                if (s.substr(i).starts_with(c)) {
                    out.push_back({i, i + c.size()});
                    i += c.size();
                    hit = true;
                    break;
                }
            }
            if (hit) continue;
        }
        std::size_t j = i;
        if (s[i] == ' ' && i + 1 < n && !is_space(at(i + 1))) j = i + 1;
        if (!is_space(at(j))) {
            std::size_t k = j;
            if (is_letter(at(j))) {
                while (k < n && is_letter(at(k))) ++k;
            } else if (is_digit(at(j))) {
                while (k < n && is_digit(at(k))) ++k;
            } else {
                while (k < n && !is_space(at(k)) && !is_letter(at(k)) && !is_digit(at(k))) ++k;
            }
            out.push_back({i, k});
            i = k;
            continue;
        }
        std::size_t k = i;
        while (k < n && is_space(at(k))) ++k;
        if (k < n && k - i > 1) {
            out.push_back({i, k - 1});
            i = k - 1;
        } else if (k < n) {
            out.push_back({i, i + 1});
            i = i + 1;
        } else {
            out.push_back({i, k});
            i = k;
        }
    }
    return out;
}

Tokenizer Tokenizer::fallback()
{
    return Tokenizer{};
}

Tokenizer Tokenizer::from_merges(const std::vector<std::pair<std::string, std::string>>& merges)
{
    auto model = std::make_shared<BpeModel>();
    int rank = 0;
    for (const auto& m : merges) model->ranks.emplace(m, rank++);
    Tokenizer t;
    t.bpe_ = std::move(model);
    return t;
}

Tokenizer Tokenizer::from_files(const std::filesystem::path& vocab_json,
                                const std::filesystem::path& merges_file)
{
    std::ifstream vin(vocab_json);
    if (!vin) throw ConfigError("cannot open vocabulary file: " + vocab_json.string());
    std::ifstream min(merges_file);
    if (!min) throw ConfigError("cannot open merges file: " + merges_file.string());

    nlohmann::json vocab;
    try {
        vin >> vocab;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed vocabulary file " + vocab_json.string() + ": " + e.what());
    }
    if (!vocab.is_object() || vocab.empty()) {
        throw ConfigError("vocabulary file is not a non-empty object: " + vocab_json.string());
    }

    std::vector<std::pair<std::string, std::string>> merges;
    std::string line;
    while (std::getline(min, line)) {
        if (line.empty() || line.starts_with("#version")) continue;
        const auto sp = line.find(' ');
        if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size()) {
            throw ConfigError("malformed merge rule: " + line);
        }
        merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
    }
    return from_merges(merges);
}

std::vector<TokenSpan> Tokenizer::spans(std::string_view text) const
{
    std::vector<TokenSpan> out;
    if (bpe_) {
        for (const auto& w : gpt2_pretokenize(text)) {
            bpe_word(*bpe_, text.substr(w.begin, w.end - w.begin), w.begin, out);
        }
        return out;
    }
    const std::size_t n = text.size();
    std::size_t i = 0;
    auto word = [&](std::size_t k) {
        auto c = static_cast<unsigned char>(text[k]);
        return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
    };
    while (i < n) {
        if (is_space(static_cast<unsigned char>(text[i]))) {
            ++i;
        } else if (word(i)) {
            std::size_t k = i;
            while (k < n && word(k)) ++k;
            out.push_back({i, k});
            i = k;
        } else {
            out.push_back({i, i + 1});
            ++i;
        }
    }
    return out;
}

std::size_t Tokenizer::count(std::string_view text) const
{
    return spans(text).size();
}

}  // namespace callsum

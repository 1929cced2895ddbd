#include <string>
#include <string_view>

#include "pragrank/metrics.hpp"

namespace pragrank {

namespace {

// Direct transcription of the reference ANSI C stemmer (with its two
// documented departures: "bli" -> "ble" and "logi" -> "log").
class Porter {
public:
    explicit Porter(std::string_view word) : b_(word), k_(static_cast<int>(word.size()) - 1) {}

    std::string run() {
        if (k_ <= 1) return b_;
        step1ab();
        if (k_ > 0) {
            step1c();
            step2();
            step3();
            step4();
            step5();
        }
        return b_.substr(0, static_cast<std::size_t>(k_ + 1));
    }

private:
    char at(int i) const { return b_[static_cast<std::size_t>(i)]; }

    bool cons(int i) const {
        switch (at(i)) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 ? true : !cons(i - 1);
            default: return true;
        }
    }

    // Number of VC sequences in b[0..j].
    int m() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j_; ++i) {
            if (!cons(i)) return true;
        }
        return false;
    }

    bool double_cons(int j) const {
        if (j < 1) return false;
        if (at(j) != at(j - 1)) return false;
        return cons(j);
    }

    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        const char ch = at(i);
        return !(ch == 'w' || ch == 'x' || ch == 'y');
    }

    bool ends(std::string_view s) {
        const int len = static_cast<int>(s.size());
        if (s.back() != at(k_)) return false;
        if (len > k_ + 1) return false;
        if (b_.compare(static_cast<std::size_t>(k_ - len + 1), s.size(), s) != 0) return false;
        j_ = k_ - len;
        return true;
    }

    void set_to(std::string_view s) {
        b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
        k_ = j_ + static_cast<int>(s.size());
    }

    void r(std::string_view s) {
        if (m() > 0) set_to(s);
    }

    void step1ab() {
        if (at(k_) == 's') {
            if (ends("sses")) {
                k_ -= 2;
            } else if (ends("ies")) {
                set_to("i");
            } else if (at(k_ - 1) != 's') {
                --k_;
            }
        }
        if (ends("eed")) {
            if (m() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            if (ends("at")) {
                set_to("ate");
            } else if (ends("bl")) {
                set_to("ble");
            } else if (ends("iz")) {
                set_to("ize");
            } else if (double_cons(k_)) {
                --k_;
                const char ch = at(k_);
                if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
            } else if (m() == 1 && cvc(k_)) {
                set_to("e");
            }
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[static_cast<std::size_t>(k_)] = 'i';
    }

    // Tries (suffix, replacement) pairs in order; the first suffix that
    // matches ends the step whether or not the replacement applies.
    template <std::size_t N>
    void table(const std::pair<std::string_view, std::string_view> (&rules)[N]) {
        for (const auto& [suffix, repl] : rules) {
            if (ends(suffix)) {
                r(repl);
                return;
            }
        }
    }

    void step2() {
        if (k_ < 1) return;
        switch (at(k_ - 1)) {
            case 'a': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"ational", "ate"}, {"tional", "tion"}};
                table(t);
                break;
            }
            case 'c': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"enci", "ence"}, {"anci", "ance"}};
                table(t);
                break;
            }
            case 'e': {
                static const std::pair<std::string_view, std::string_view> t[] = {{"izer", "ize"}};
                table(t);
                break;
            }
            case 'l': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"bli", "ble"}, {"alli", "al"}, {"entli", "ent"}, {"eli", "e"}, {"ousli", "ous"}};
                table(t);
                break;
            }
            case 'o': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"ization", "ize"}, {"ation", "ate"}, {"ator", "ate"}};
                table(t);
                break;
            }
            case 's': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"alism", "al"}, {"iveness", "ive"}, {"fulness", "ful"}, {"ousness", "ous"}};
                table(t);
                break;
            }
            case 't': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"aliti", "al"}, {"iviti", "ive"}, {"biliti", "ble"}};
                table(t);
                break;
            }
            case 'g': {
                static const std::pair<std::string_view, std::string_view> t[] = {{"logi", "log"}};
                table(t);
                break;
            }
            default:
                break;
        }
    }

    void step3() {
        switch (at(k_)) {
            case 'e': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}};
                table(t);
                break;
            }
            case 'i': {
                static const std::pair<std::string_view, std::string_view> t[] = {{"iciti", "ic"}};
                table(t);
                break;
            }
            case 'l': {
                static const std::pair<std::string_view, std::string_view> t[] = {
                    {"ical", "ic"}, {"ful", ""}};
                table(t);
                break;
            }
            case 's': {
                static const std::pair<std::string_view, std::string_view> t[] = {{"ness", ""}};
                table(t);
                break;
            }
            default:
                break;
        }
    }

    void step4() {
        if (k_ < 1) return;
        bool hit = false;
        switch (at(k_ - 1)) {
            case 'a': hit = ends("al"); break;
            case 'c': hit = ends("ance") || ends("ence"); break;
            case 'e': hit = ends("er"); break;
            case 'i': hit = ends("ic"); break;
            case 'l': hit = ends("able") || ends("ible"); break;
            case 'n': hit = ends("ant") || ends("ement") || ends("ment") || ends("ent"); break;
            case 'o':
                hit = (ends("ion") && j_ >= 0 && (at(j_) == 's' || at(j_) == 't')) || ends("ou");
                break;
            case 's': hit = ends("ism"); break;
            case 't': hit = ends("ate") || ends("iti"); break;
            case 'u': hit = ends("ous"); break;
            case 'v': hit = ends("ive"); break;
            case 'z': hit = ends("ize"); break;
            default: break;
        }
        if (hit && m() > 1) k_ = j_;
    }

    void step5() {
        j_ = k_;
        if (at(k_) == 'e') {
            const int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
        }
        if (at(k_) == 'l' && double_cons(k_) && m() > 1) --k_;
    }

    std::string b_;
    int k_;
    int j_ = 0;
};

}  // namespace

std::string porter_stem(std::string_view word) {
    for (char c : word) {
        if (c < 'a' || c > 'z') return std::string(word);
    }
    return Porter(word).run();
}

}  // namespace pragrank

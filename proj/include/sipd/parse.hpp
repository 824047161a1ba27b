// Copyright 2026 The sipd Authors
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

#ifndef SIPD_PARSE_HPP
#define SIPD_PARSE_HPP

#include <cctype>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sipd/expr.hpp"

namespace sipd {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset)
    {
    }
    [[nodiscard]] std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

namespace detail {

// Recursive descent over
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ['-'] power
//   power  := atom ['^' factor]
//   atom   := number | ident | func '(' expr ')' | '(' expr ')'
// plus the internal forms mid(lo, e, hi) and smid(lo, e, hi, t) emitted by to_string.
class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    Expr parse()
    {
        Expr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Expr expr()
    {
        Expr e = term();
        for (;;) {
            if (accept('+')) {
                e = e + term();
            } else if (accept('-')) {
                e = e - term();
            } else {
                return e;
            }
        }
    }

    Expr term()
    {
        Expr e = factor();
        for (;;) {
            if (accept('*')) {
                e = e * factor();
            } else if (accept('/')) {
                e = e / factor();
            } else {
                return e;
            }
        }
    }

    Expr factor()
    {
        if (accept('-')) return -power();
        return power();
    }

    Expr power()
    {
        Expr base = atom();
        if (accept('^')) return pow(base, factor());
        return base;
    }

    double number()
    {
        skip();
        const std::size_t start = pos_;
        auto digits = [&] {
            const std::size_t b = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return pos_ - b;
        };
        std::size_t n = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) {
            pos_ = start;
            fail("expected a number");
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            const std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;
        }
        const std::string text(s_.substr(start, pos_ - start));
        return std::strtod(text.c_str(), nullptr);
    }

    double signed_number()
    {
        const bool neg = accept('-');
        const double v = number();
        return neg ? -v : v;
    }

    Expr atom()
    {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Expr(number());
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string_view word = s_.substr(start, pos_ - start);
            if ((word[0] == 'x' || word[0] == 'y' || word[0] == 'p') && word.size() > 1 &&
                word.find_first_not_of("0123456789", 1) == std::string_view::npos) {
                const long idx = std::strtol(std::string(word.substr(1)).c_str(), nullptr, 10);
                if (idx < 1 || idx > (1 << 20)) {
                    pos_ = start;
                    fail("variable index must be positive");
                }
                const VarKind k = word[0] == 'x' ? VarKind::X : (word[0] == 'y' ? VarKind::Y : VarKind::P);
                return Expr::var(k, static_cast<int>(idx));
            }
            Op op;
            if (word == "exp") {
                op = Op::Exp;
            } else if (word == "log") {
                op = Op::Log;
            } else if (word == "sqrt") {
                op = Op::Sqrt;
            } else if (word == "abs") {
                op = Op::Abs;
            } else if (word == "mid" || word == "smid") {
                return clamp_form(word == "smid");
            } else {
                skip();
                const bool call = pos_ < s_.size() && s_[pos_] == '(';
                pos_ = start;
                fail(std::string(call ? "unknown function '" : "unknown identifier '") + std::string(word) + "'");
            }
            expect('(');
            Expr e = expr();
            expect(')');
            return Expr::unary(op, e);
        }
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    Expr clamp_form(bool smooth)
    {
        expect('(');
        const double lo = signed_number();
        expect(',');
        Expr e = expr();
        expect(',');
        const double hi = signed_number();
        double t = 0.0;
        if (smooth) {
            expect(',');
            t = signed_number();
        }
        expect(')');
        return smooth ? softclamp(e, lo, hi, t) : clamp(e, lo, hi);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses an expression; throws ParseError carrying the byte offset of the failure.
inline Expr parse(std::string_view text) { return detail::Parser(text).parse(); }

}  // namespace sipd

#endif  // SIPD_PARSE_HPP

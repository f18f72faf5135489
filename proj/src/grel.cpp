#include "refineflow/grel.hpp"

#include <cctype>
#include <utility>

namespace refineflow::grel {

namespace {

enum class TokenKind { kIdent, kString, kPunct, kEnd };

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Splits source into tokens; nullopt on any character outside the subset
// (numbers, operators other than '+', unterminated strings).
std::optional<std::vector<Token>> tokenize(std::string_view source) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < source.size()) {
    const char c = source[pos];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else if (is_ident_start(c)) {
      const std::size_t start = pos;
      while (pos < source.size() && is_ident_char(source[pos])) ++pos;
      tokens.push_back({TokenKind::kIdent, std::string(source.substr(start, pos - start))});
    } else if (c == '"' || c == '\'') {
      const char quote = c;
      std::string text;
      ++pos;
      bool closed = false;
      while (pos < source.size()) {
        char ch = source[pos++];
        if (ch == quote) {
          closed = true;
          break;
        }
        if (ch == '\\') {
          if (pos >= source.size()) return std::nullopt;
          const char esc = source[pos++];
          switch (esc) {
            case 'n': ch = '\n'; break;
            case 't': ch = '\t'; break;
            case 'r': ch = '\r'; break;
            case '\\':
            case '"':
            case '\'':
            case '/': ch = esc; break;
            default: return std::nullopt;
          }
        }
        text.push_back(ch);
      }
      if (!closed) return std::nullopt;
      tokens.push_back({TokenKind::kString, std::move(text)});
    } else if (c == '(' || c == ')' || c == '[' || c == ']' || c == '.' || c == '+') {
      tokens.push_back({TokenKind::kPunct, std::string(1, c)});
      ++pos;
    } else {
      return std::nullopt;
    }
  }
  tokens.push_back({TokenKind::kEnd, {}});
  return tokens;
}

std::optional<Method> method_named(std::string_view name) {
  if (name == "toLowercase") return Method::kToLowercase;
  if (name == "toUppercase") return Method::kToUppercase;
  if (name == "trim") return Method::kTrim;
  if (name == "toNumber") return Method::kToNumber;
  if (name == "toString") return Method::kToString;
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  std::optional<Expression> parse() {
    auto expr = expression();
    if (!expr || peek().kind != TokenKind::kEnd) return std::nullopt;
    return expr;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }

  bool accept_punct(char c) {
    if (peek().kind == TokenKind::kPunct && peek().text[0] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_ident(std::string_view name) {
    if (peek().kind == TokenKind::kIdent && peek().text == name) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::optional<Expression> expression() {
    Expression expr;
    do {
      auto t = term();
      if (!t) return std::nullopt;
      expr.terms.push_back(std::move(*t));
    } while (accept_punct('+'));
    return expr;
  }

  std::optional<Term> term() {
    auto op = operand();
    if (!op) return std::nullopt;
    Term t{std::move(*op), {}};
    while (accept_punct('.')) {
      if (peek().kind != TokenKind::kIdent) return std::nullopt;
      auto method = method_named(peek().text);
      if (!method) return std::nullopt;
      ++pos_;
      if (!accept_punct('(') || !accept_punct(')')) return std::nullopt;
      t.calls.push_back(*method);
    }
    return t;
  }

  std::optional<Operand> operand() {
    const Token& tok = peek();
    if (tok.kind == TokenKind::kString) {
      ++pos_;
      return StringLiteral{tok.text};
    }
    if (accept_punct('(')) {
      auto inner = expression();
      if (!inner || !accept_punct(')')) return std::nullopt;
      return Group{std::make_shared<const Expression>(std::move(*inner))};
    }
    if (accept_ident("value")) return OwnValue{};
    if (accept_ident("cells")) {
      std::string label;
      if (accept_punct('[')) {
        if (peek().kind != TokenKind::kString) return std::nullopt;
        label = peek().text;
        ++pos_;
        if (!accept_punct(']')) return std::nullopt;
      } else if (accept_punct('.')) {
        if (peek().kind != TokenKind::kIdent) return std::nullopt;
        label = peek().text;
        ++pos_;
      } else {
        return std::nullopt;
      }
      if (!accept_punct('.') || !accept_ident("value")) return std::nullopt;
      return CellValue{std::move(label)};
    }
    return std::nullopt;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void collect(const Expression& expr, ExpressionAnalysis& out) {
  for (const Term& term : expr.terms) {
    if (std::holds_alternative<OwnValue>(term.operand)) {
      out.reads_own_value = true;
    } else if (const auto* cell = std::get_if<CellValue>(&term.operand)) {
      out.referenced_columns.insert(cell->label);
    } else if (const auto* group = std::get_if<Group>(&term.operand)) {
      collect(*group->inner, out);
    }
  }
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kToLowercase: return "toLowercase";
    case Method::kToUppercase: return "toUppercase";
    case Method::kTrim: return "trim";
    case Method::kToNumber: return "toNumber";
    case Method::kToString: return "toString";
  }
  return "";
}

std::optional<Expression> parse_expression(std::string_view source) {
  std::size_t start = 0;
  while (start < source.size() && std::isspace(static_cast<unsigned char>(source[start]))) {
    ++start;
  }
  source.remove_prefix(start);
  constexpr std::string_view kGrelTag = "grel:";
  if (source.substr(0, kGrelTag.size()) == kGrelTag) {
    source.remove_prefix(kGrelTag.size());
  }
  auto tokens = tokenize(source);
  if (!tokens) return std::nullopt;
  return Parser(std::move(*tokens)).parse();
}

ExpressionAnalysis analyze_expression(std::string_view expression,
                                      std::string_view /*own_column*/) {
  ExpressionAnalysis analysis;
  auto parsed = parse_expression(expression);
  if (!parsed) {
    analysis.opaque = true;
    return analysis;
  }
  collect(*parsed, analysis);
  return analysis;
}

}  // namespace refineflow::grel

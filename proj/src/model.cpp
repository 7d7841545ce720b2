#include "hftlab/model.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hftlab {

namespace {

std::string format_loc(const std::string& message, SourceLocation where) {
  std::ostringstream os;
  os << "line " << where.line << ", column " << where.column << ": "
     << message;
  return os.str();
}

enum class Tok {
  Ident,
  Number,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  LParen,
  RParen,
  Comma,
  Semicolon,
  Equals,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLocation loc;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Semicolon: return "';'";
    case Tok::Equals: return "'='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_ws_and_comments();
    Token t;
    t.loc = {line_, col_};
    if (pos_ >= text_.size()) {
      t.kind = Tok::End;
      return t;
    }
    const char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        advance();
      }
      t.kind = Tok::Ident;
      t.text = std::string(text_.substr(start, pos_ - start));
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        advance();
      }
      if (pos_ < text_.size() && text_[pos_] == '.') {
        advance();
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          advance();
        }
      }
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        const std::size_t mark = pos_;
        advance();
        if (pos_ < text_.size() &&
            (text_[pos_] == '+' || text_[pos_] == '-')) {
          advance();
        }
        if (pos_ < text_.size() &&
            std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          while (pos_ < text_.size() &&
                 std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            advance();
          }
        } else {
          // not an exponent after all (e.g. "2e" then junk): back off
          rewind_to(mark, t.loc, start);
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(text_.substr(start, pos_ - start));
      return t;
    }
    advance();
    switch (c) {
      case '{': t.kind = Tok::LBrace; return t;
      case '}': t.kind = Tok::RBrace; return t;
      case '[': t.kind = Tok::LBracket; return t;
      case ']': t.kind = Tok::RBracket; return t;
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      case ',': t.kind = Tok::Comma; return t;
      case ';': t.kind = Tok::Semicolon; return t;
      case '=': t.kind = Tok::Equals; return t;
      case '+': t.kind = Tok::Plus; return t;
      case '-': t.kind = Tok::Minus; return t;
      case '*': t.kind = Tok::Star; return t;
      case '/': t.kind = Tok::Slash; return t;
      case '^': t.kind = Tok::Caret; return t;
      default: {
        std::ostringstream os;
        os << "unexpected character '" << c << "'";
        throw ParseError(os.str(), t.loc);
      }
    }
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  // Re-scan from token start up to target to restore line/col exactly.
  void rewind_to(std::size_t target, SourceLocation tok_start,
                 std::size_t tok_start_pos) {
    pos_ = tok_start_pos;
    line_ = tok_start.line;
    col_ = tok_start.column;
    while (pos_ < target) advance();
  }

  void skip_ws_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { bump(); }

  ModelDefinition parse_file() {
    ModelDefinition model;
    if (cur_.kind == Tok::End) {
      throw ParseError("empty model: expected at least one matrix declaration",
                       cur_.loc);
    }
    while (cur_.kind != Tok::End) {
      MatrixFamily fam = parse_decl();
      for (const auto& other : model.families) {
        if (other.name == fam.name) {
          throw ParseError("duplicate matrix name '" + fam.name + "'",
                           decl_loc_);
        }
      }
      if (!model.families.empty() && fam.dim != model.dimension) {
        std::ostringstream os;
        os << "matrix '" << fam.name << "' has dim " << fam.dim
           << " but earlier declarations use dim " << model.dimension;
        throw ParseError(os.str(), decl_loc_);
      }
      model.dimension = fam.dim;
      model.families.push_back(std::move(fam));
    }
    if (!model.find("H")) {
      throw ParseError("model must declare a matrix named 'H'", {1, 1});
    }
    return model;
  }

 private:
  void bump() { cur_ = lex_.next(); }

  Token expect(Tok kind, const char* what) {
    if (cur_.kind != kind) {
      std::ostringstream os;
      os << "expected " << what << ", found " << tok_name(cur_.kind);
      if (cur_.kind == Tok::Ident || cur_.kind == Tok::Number) {
        os << " '" << cur_.text << "'";
      }
      throw ParseError(os.str(), cur_.loc);
    }
    Token t = cur_;
    bump();
    return t;
  }

  void expect_keyword(const char* kw) {
    if (cur_.kind != Tok::Ident || cur_.text != kw) {
      std::ostringstream os;
      os << "expected '" << kw << "', found " << tok_name(cur_.kind);
      if (cur_.kind == Tok::Ident || cur_.kind == Tok::Number) {
        os << " '" << cur_.text << "'";
      }
      throw ParseError(os.str(), cur_.loc);
    }
    bump();
  }

  long parse_int(const char* what) {
    Token t = expect(Tok::Number, what);
    for (char c : t.text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        throw ParseError(std::string("expected integer ") + what +
                             ", found '" + t.text + "'",
                         t.loc);
      }
    }
    errno = 0;
    const long v = std::strtol(t.text.c_str(), nullptr, 10);
    if (errno == ERANGE) {
      throw ParseError("integer '" + t.text + "' out of range", t.loc);
    }
    return v;
  }

  MatrixFamily parse_decl() {
    decl_loc_ = cur_.loc;
    expect_keyword("matrix");
    Token name = expect(Tok::Ident, "matrix name");
    MatrixFamily fam;
    fam.name = name.text;
    expect(Tok::LBrace, "'{'");
    expect_keyword("dim");
    expect(Tok::Equals, "'='");
    Token dim_tok = cur_;
    const long dim = parse_int("matrix dimension");
    if (dim < 1 || dim > 4096) {
      std::ostringstream os;
      os << "matrix dimension must be in [1, 4096], got " << dim;
      throw ParseError(os.str(), dim_tok.loc);
    }
    fam.dim = static_cast<int>(dim);
    expect(Tok::Semicolon, "';'");
    while (cur_.kind == Tok::LBracket) {
      fam.entries.push_back(parse_entry(fam));
    }
    expect(Tok::RBrace, "'}' or '['");
    return fam;
  }

  MatrixEntry parse_entry(const MatrixFamily& fam) {
    Token open = expect(Tok::LBracket, "'['");
    const long row = parse_int("row index");
    expect(Tok::Comma, "','");
    const long col = parse_int("column index");
    expect(Tok::RBracket, "']'");
    if (row < 1 || col < 1 || row > fam.dim || col > fam.dim) {
      std::ostringstream os;
      os << "entry [" << row << "," << col << "] outside 1.." << fam.dim;
      throw ParseError(os.str(), open.loc);
    }
    if (row > col) {
      std::ostringstream os;
      os << "entry [" << row << "," << col
         << "]: only the upper triangle (row <= col) may be declared; the "
            "lower triangle follows by conjugation";
      throw ParseError(os.str(), open.loc);
    }
    for (const auto& e : fam.entries) {
      if (e.row == row && e.col == col) {
        std::ostringstream os;
        os << "entry [" << row << "," << col << "] declared twice in matrix '"
           << fam.name << "'";
        throw ParseError(os.str(), open.loc);
      }
    }
    expect(Tok::Equals, "'='");
    MatrixEntry entry;
    entry.row = static_cast<int>(row);
    entry.col = static_cast<int>(col);
    entry.value = parse_expr();
    expect(Tok::Semicolon, "';'");
    return entry;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      const bool plus = cur_.kind == Tok::Plus;
      bump();
      Expr rhs = parse_term();
      lhs = plus ? Expr::add(lhs, rhs) : Expr::sub(lhs, rhs);
    }
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      const bool star = cur_.kind == Tok::Star;
      bump();
      Expr rhs = parse_factor();
      lhs = star ? Expr::mul(lhs, rhs) : Expr::div(lhs, rhs);
    }
    return lhs;
  }

  Expr parse_factor() {
    Expr b = parse_base();
    if (cur_.kind == Tok::Caret) {
      bump();
      const long e = parse_int("exponent");
      return Expr::pow(b, e);
    }
    return b;
  }

  // Unary minus lives here, so it binds tighter than '^'.
  Expr parse_base() {
    switch (cur_.kind) {
      case Tok::Minus: {
        bump();
        return Expr::negate(parse_base());
      }
      case Tok::Number: {
        Token t = cur_;
        bump();
        return Expr::constant(std::strtod(t.text.c_str(), nullptr));
      }
      case Tok::Ident: {
        Token t = cur_;
        bump();
        if (t.text == "i") return Expr::constant(cplx(0.0, 1.0));
        if (t.text == "lambda") return Expr::parameter();
        Expr::Func fn;
        if (t.text == "sin") {
          fn = Expr::Func::Sin;
        } else if (t.text == "cos") {
          fn = Expr::Func::Cos;
        } else if (t.text == "exp") {
          fn = Expr::Func::Exp;
        } else if (t.text == "sqrt") {
          fn = Expr::Func::Sqrt;
        } else if (t.text == "ln") {
          fn = Expr::Func::Ln;
        } else {
          throw ParseError(
              "unknown identifier '" + t.text +
                  "' (expected a number, 'i', 'lambda', or one of sin, cos, "
                  "exp, sqrt, ln)",
              t.loc);
        }
        expect(Tok::LParen, "'(' after function name");
        Expr arg = parse_expr();
        expect(Tok::RParen, "')'");
        return Expr::call(fn, arg);
      }
      case Tok::LParen: {
        bump();
        Expr inner = parse_expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default: {
        std::ostringstream os;
        os << "expected an expression, found " << tok_name(cur_.kind);
        throw ParseError(os.str(), cur_.loc);
      }
    }
  }

  Lexer lex_;
  Token cur_;
  SourceLocation decl_loc_;
};

HermitianMatrix evaluate_entries(const MatrixFamily& family, double lambda,
                                 bool differentiate) {
  std::vector<std::tuple<int, int, cplx>> upper;
  upper.reserve(family.entries.size());
  for (const auto& entry : family.entries) {
    const Expr e = differentiate ? entry.value.derivative() : entry.value;
    cplx v = e.evaluate(lambda);
    if (entry.row == entry.col) {
      const double bound = 1e-12 * (1.0 + std::abs(v.real()));
      if (std::abs(v.imag()) > bound) {
        std::ostringstream os;
        os << "matrix '" << family.name << "' entry [" << entry.row << ","
           << entry.col << "] at lambda = " << lambda
           << ": diagonal value has imaginary part " << v.imag()
           << " (must be real)";
        throw EvalError(os.str());
      }
      v = cplx(v.real(), 0.0);
    }
    upper.emplace_back(entry.row - 1, entry.col - 1, v);
  }
  return HermitianMatrix::from_upper(family.dim, upper);
}

}  // namespace

ParseError::ParseError(const std::string& message, SourceLocation where)
    : std::runtime_error(format_loc(message, where)), where_(where) {}

const MatrixFamily* ModelDefinition::find(std::string_view name) const {
  for (const auto& fam : families) {
    if (fam.name == name) return &fam;
  }
  return nullptr;
}

const MatrixFamily& ModelDefinition::hamiltonian() const {
  const MatrixFamily* h = find("H");
  if (!h) throw EvalError("model has no matrix named 'H'");
  return *h;
}

ModelDefinition parse_model(std::string_view text) {
  Parser p(text);
  return p.parse_file();
}

ModelDefinition parse_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw EvalError("cannot open model file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

HermitianMatrix evaluate_matrix(const MatrixFamily& family, double lambda) {
  return evaluate_entries(family, lambda, false);
}

HermitianMatrix evaluate_derivative(const MatrixFamily& family,
                                    double lambda) {
  return evaluate_entries(family, lambda, true);
}

namespace {

const MatrixFamily& family_or_throw(const ModelDefinition& m,
                                    std::string_view name) {
  const MatrixFamily* f = m.find(name);
  if (!f) {
    throw EvalError("unknown matrix name '" + std::string(name) + "'");
  }
  return *f;
}

}  // namespace

HermitianMatrix evaluate_matrix(const ModelDefinition& m,
                                std::string_view name, double lambda) {
  return evaluate_entries(family_or_throw(m, name), lambda, false);
}

HermitianMatrix evaluate_derivative(const ModelDefinition& m,
                                    std::string_view name, double lambda) {
  return evaluate_entries(family_or_throw(m, name), lambda, true);
}

}  // namespace hftlab

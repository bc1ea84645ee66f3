#include "levyhjmm/spec_dsl.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

namespace levyhjmm {

std::string ParseError::to_string() const {
    std::ostringstream os;
    os << "parse error at " << line << ":" << col << ": " << message;
    if (!expected.empty()) {
        os << " (expected ";
        for (size_t i = 0; i < expected.size(); ++i) {
            if (i) os << ", ";
            os << expected[i];
        }
        os << ")";
    }
    return os.str();
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok { ident, number, string, lbrace, rbrace, lparen, rparen, equals, comma, plus, end };

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::ident: return "identifier";
        case Tok::number: return "number";
        case Tok::string: return "string";
        case Tok::lbrace: return "'{'";
        case Tok::rbrace: return "'}'";
        case Tok::lparen: return "'('";
        case Tok::rparen: return "')'";
        case Tok::equals: return "'='";
        case Tok::comma: return "','";
        case Tok::plus: return "'+'";
        case Tok::end: return "end of input";
    }
    return "?";
}

struct Token {
    Tok kind = Tok::end;
    std::string text;
    double number = 0.0;
    int line = 1, col = 1;
};

/// Thrown internally during parsing/lowering; converted to ParseError.
struct Fail {
    ParseError error;
};

[[noreturn]] void fail(const std::string& message, int line, int col,
                       std::vector<std::string> expected = {}) {
    throw Fail{ParseError{message, line, col, std::move(expected)}};
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_trivia();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= text_.size()) {
            t.kind = Tok::end;
            return t;
        }
        const char c = text_[pos_];
        switch (c) {
            case '{': advance(); t.kind = Tok::lbrace; return t;
            case '}': advance(); t.kind = Tok::rbrace; return t;
            case '(': advance(); t.kind = Tok::lparen; return t;
            case ')': advance(); t.kind = Tok::rparen; return t;
            case '=': advance(); t.kind = Tok::equals; return t;
            case ',': advance(); t.kind = Tok::comma; return t;
            case '+': advance(); t.kind = Tok::plus; return t;
            case '"': return lex_string(t);
            default: break;
        }
        if (is_ident_start(c)) return lex_ident(t);
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.')
            return lex_number(t);
        fail(std::string("unexpected character '") + printable(c) + "'", line_, col_);
    }

private:
    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) {
        return is_ident_start(c) || (c >= '0' && c <= '9');
    }
    static std::string printable(char c) {
        if (c >= 0x20 && c < 0x7f) return std::string(1, c);
        char buf[8];
        std::snprintf(buf, sizeof(buf), "\\x%02x", static_cast<unsigned char>(c));
        return buf;
    }

    void advance() {
        if (pos_ < text_.size()) {
            if (text_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_trivia() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    Token lex_ident(Token t) {
        const size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) advance();
        t.kind = Tok::ident;
        t.text = std::string(text_.substr(start, pos_ - start));
        return t;
    }

    Token lex_number(Token t) {
        const size_t start = pos_;
        if (pos_ < text_.size() && text_[pos_] == '-') advance();
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            advance();
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            advance();
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) advance();
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        }
        const std::string_view span = text_.substr(start, pos_ - start);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(span.data(), span.data() + span.size(), value);
        if (ec != std::errc() || ptr != span.data() + span.size())
            fail("malformed number '" + std::string(span) + "'", t.line, t.col, {"number"});
        t.kind = Tok::number;
        t.number = value;
        t.text = std::string(span);
        return t;
    }

    Token lex_string(Token t) {
        advance();  // opening quote
        std::string out;
        while (true) {
            if (pos_ >= text_.size())
                fail("unterminated string", t.line, t.col, {"'\"'"});
            const char c = text_[pos_];
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                advance();
                if (pos_ >= text_.size()) fail("unterminated escape", line_, col_);
                const char e = text_[pos_];
                if (e == '"' || e == '\\') out.push_back(e);
                else fail(std::string("unknown escape '\\") + printable(e) + "'", line_, col_);
                advance();
            } else {
                out.push_back(c);
                advance();
            }
        }
        t.kind = Tok::string;
        t.text = std::move(out);
        return t;
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

struct Value;

struct Argument {
    std::string name;  // empty when positional
    int line = 0, col = 0;
    std::shared_ptr<Value> value;
};

struct Value {
    enum class Kind { number, string, ident, call, sum };
    Kind kind = Kind::number;
    double number = 0.0;
    std::string text;             // string content, ident name, or call name
    std::vector<Argument> args;   // call
    std::vector<Value> operands;  // sum
    int line = 0, col = 0;
};

struct Entry {
    bool is_block = false;
    std::string name;
    std::vector<Entry> children;  // block
    Value value;                  // pair
    int line = 0, col = 0;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lexer_(text) { buffer_.push_back(lexer_.next()); }

    std::vector<Entry> parse_spec() {
        std::vector<Entry> entries;
        while (peek().kind != Tok::end) entries.push_back(parse_entry());
        return entries;
    }

private:
    const Token& peek(size_t k = 0) {
        while (buffer_.size() <= k) buffer_.push_back(lexer_.next());
        return buffer_[k];
    }

    Token take() {
        Token t = peek();
        buffer_.erase(buffer_.begin());
        return t;
    }

    Token expect(Tok kind) {
        if (peek().kind != kind)
            fail(std::string("unexpected ") + tok_name(peek().kind), peek().line, peek().col,
                 {tok_name(kind)});
        return take();
    }

    Entry parse_entry() {
        Token name = expect(Tok::ident);
        Entry e;
        e.name = name.text;
        e.line = name.line;
        e.col = name.col;
        if (peek().kind == Tok::lbrace) {
            take();
            e.is_block = true;
            while (peek().kind != Tok::rbrace) {
                if (peek().kind == Tok::end)
                    fail("unterminated block '" + e.name + "'", peek().line, peek().col, {"'}'"});
                e.children.push_back(parse_entry());
            }
            take();  // '}'
            return e;
        }
        expect(Tok::equals);
        e.value = parse_value();
        return e;
    }

    Value parse_value() {
        Value first = parse_primary();
        if (peek().kind != Tok::plus) return first;
        Value sum;
        sum.kind = Value::Kind::sum;
        sum.line = first.line;
        sum.col = first.col;
        sum.operands.push_back(std::move(first));
        while (peek().kind == Tok::plus) {
            take();
            sum.operands.push_back(parse_primary());
        }
        return sum;
    }

    Value parse_primary() {
        if (++depth_ > 200) fail("nesting too deep", peek().line, peek().col);
        struct DepthGuard {
            int& d;
            ~DepthGuard() { --d; }
        } guard{depth_};

        const Token& t = peek();
        Value v;
        v.line = t.line;
        v.col = t.col;
        switch (t.kind) {
            case Tok::number:
                v.kind = Value::Kind::number;
                v.number = take().number;
                return v;
            case Tok::string:
                v.kind = Value::Kind::string;
                v.text = take().text;
                return v;
            case Tok::ident: {
                Token name = take();
                if (peek().kind != Tok::lparen) {
                    v.kind = Value::Kind::ident;
                    v.text = name.text;
                    return v;
                }
                take();  // '('
                v.kind = Value::Kind::call;
                v.text = name.text;
                if (peek().kind != Tok::rparen) {
                    v.args.push_back(parse_argument());
                    while (peek().kind == Tok::comma) {
                        take();
                        v.args.push_back(parse_argument());
                    }
                }
                expect(Tok::rparen);
                return v;
            }
            default:
                fail(std::string("unexpected ") + tok_name(t.kind), t.line, t.col,
                     {"number", "string", "identifier"});
        }
    }

    Argument parse_argument() {
        Argument a;
        a.line = peek().line;
        a.col = peek().col;
        if (peek().kind == Tok::ident && peek(1).kind == Tok::equals) {
            a.name = take().text;
            take();  // '='
        }
        a.value = std::make_shared<Value>(parse_value());
        return a;
    }

    Lexer lexer_;
    std::vector<Token> buffer_;
    int depth_ = 0;
};

// ---------------------------------------------------------------------------
// Lowering: AST -> ModelSpec
// ---------------------------------------------------------------------------

double as_number(const Value& v, const std::string& what) {
    if (v.kind != Value::Kind::number)
        fail("value of " + what + " must be a number", v.line, v.col, {"number"});
    return v.number;
}

int as_int(const Value& v, const std::string& what) {
    const double d = as_number(v, what);
    const double r = std::round(d);
    if (std::abs(d - r) > 1e-9 || std::abs(d) > 1e9)
        fail("value of " + what + " must be an integer", v.line, v.col, {"integer"});
    return static_cast<int>(r);
}

std::string as_ident(const Value& v, const std::string& what) {
    if (v.kind != Value::Kind::ident)
        fail("value of " + what + " must be an identifier", v.line, v.col, {"identifier"});
    return v.text;
}

std::string as_string(const Value& v, const std::string& what) {
    if (v.kind != Value::Kind::string)
        fail("value of " + what + " must be a quoted string", v.line, v.col, {"string"});
    return v.text;
}

/// Named/positional argument access for call values.
class ArgReader {
public:
    ArgReader(const Value& call, std::vector<std::string> positional_order)
        : call_(call), order_(std::move(positional_order)) {
        size_t positional = 0;
        for (const auto& a : call.args) {
            std::string name = a.name;
            if (name.empty()) {
                if (positional >= order_.size())
                    fail("too many positional arguments to " + call.text + "()", a.line, a.col);
                name = order_[positional++];
            }
            if (by_name_.count(name))
                fail("duplicate argument '" + name + "' in " + call.text + "()", a.line, a.col);
            by_name_[name] = a.value.get();
        }
    }

    const Value* find(const std::string& name) {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) return nullptr;
        used_.insert(name);
        return it->second;
    }

    double number(const std::string& name, std::optional<double> fallback = std::nullopt) {
        const Value* v = find(name);
        if (!v) {
            if (fallback) return *fallback;
            fail("missing argument '" + name + "' in " + call_.text + "()", call_.line, call_.col);
        }
        return as_number(*v, call_.text + "." + name);
    }

    void finish() {
        for (const auto& [name, v] : by_name_)
            if (!used_.count(name))
                fail("unknown argument '" + name + "' in " + call_.text + "()", v->line, v->col);
    }

private:
    const Value& call_;
    std::vector<std::string> order_;
    std::map<std::string, const Value*> by_name_;
    std::set<std::string> used_;
};

const Value& as_call(const Value& v, const std::string& what) {
    if (v.kind != Value::Kind::call)
        fail("value of " + what + " must be a call like name(...)", v.line, v.col, {"call"});
    return v;
}

ExpPolyTerm lower_exp_poly_call(const Value& call) {
    if (call.text != "exp_poly")
        fail("expected exp_poly(...), got " + call.text + "(...)", call.line, call.col,
             {"exp_poly"});
    ArgReader args(call, {"rho", "theta", "degree", "omega"});
    ExpPolyTerm t;
    t.coeff = args.number("rho");
    t.theta = args.number("theta");
    if (const Value* v = args.find("degree")) {
        t.degree = as_int(*v, "degree");
        if (t.degree < 0) fail("degree must be >= 0", v->line, v->col);
    }
    if (const Value* v = args.find("omega")) t.omega = as_number(*v, "omega");
    if (const Value* v = args.find("phase")) {
        const std::string phase = as_ident(*v, "phase");
        if (phase == "sin") t.is_sin = true;
        else if (phase == "cos") t.is_sin = false;
        else fail("phase must be cos or sin", v->line, v->col, {"cos", "sin"});
    }
    args.finish();
    return t;
}

ExpPoly lower_exp_poly(const Value& v, const std::string& what) {
    std::vector<ExpPolyTerm> terms;
    if (v.kind == Value::Kind::sum) {
        for (const auto& op : v.operands) terms.push_back(lower_exp_poly_call(as_call(op, what)));
    } else {
        terms.push_back(lower_exp_poly_call(as_call(v, what)));
    }
    return ExpPoly(std::move(terms));
}

/// Key-value access inside one block; rejects duplicates and unknown keys.
class BlockReader {
public:
    BlockReader(const Entry& block) : block_(block) {
        for (const auto& child : block.children) {
            if (child.is_block) {
                blocks_.push_back(&child);
                continue;
            }
            if (pairs_.count(child.name))
                fail("duplicate key '" + child.name + "' in block '" + block.name + "'",
                     child.line, child.col);
            pairs_[child.name] = &child;
        }
    }

    const Value* find(const std::string& key) {
        auto it = pairs_.find(key);
        if (it == pairs_.end()) return nullptr;
        used_.insert(key);
        return &it->second->value;
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const Value* v = find(key);
        if (!v) {
            if (fallback) return *fallback;
            fail("missing key '" + key + "' in block '" + block_.name + "'", block_.line,
                 block_.col);
        }
        return as_number(*v, key);
    }

    const std::vector<const Entry*>& blocks() const { return blocks_; }

    void finish() {
        for (const auto& [key, entry] : pairs_)
            if (!used_.count(key))
                fail("unknown key '" + key + "' in block '" + block_.name + "'", entry->line,
                     entry->col);
    }

private:
    const Entry& block_;
    std::map<std::string, const Entry*> pairs_;
    std::set<std::string> used_;
    std::vector<const Entry*> blocks_;
};

JumpDistribution lower_jumps(const Value& v) {
    const Value& call = as_call(v, "jumps");
    if (call.text == "point_mass") {
        ArgReader args(call, {"x0"});
        auto j = JumpDistribution::point_mass(args.number("x0"));
        args.finish();
        return j;
    }
    if (call.text == "exponential") {
        ArgReader args(call, {"rate"});
        auto j = JumpDistribution::exponential(args.number("rate"));
        args.finish();
        return j;
    }
    if (call.text == "normal") {
        ArgReader args(call, {"mean", "sd"});
        auto j = JumpDistribution::normal(args.number("mean"), args.number("sd"));
        args.finish();
        return j;
    }
    fail("unknown jump distribution '" + call.text + "'", call.line, call.col,
         {"point_mass", "exponential", "normal"});
}

LevyModel lower_levy(const Entry& block) {
    BlockReader r(block);
    const Value* kind_v = r.find("kind");
    if (!kind_v) fail("missing key 'kind' in block 'levy'", block.line, block.col);
    const std::string kind = as_ident(*kind_v, "kind");

    const double b = r.number("b", 0.0);
    const double c = r.number("c", 0.0);

    LevyModel m;
    if (kind == "brownian") {
        m = LevyModel::brownian(b, c);
    } else if (kind == "compound_poisson") {
        const Value* jumps_v = r.find("jumps");
        if (!jumps_v) fail("compound_poisson requires 'jumps = ...'", block.line, block.col);
        m = LevyModel::compound_poisson(b, c, r.number("intensity", 0.0), lower_jumps(*jumps_v));
    } else if (kind == "merton") {
        m = LevyModel::merton(b, c, r.number("intensity", 0.0), r.number("jump_mean", 0.0),
                              r.number("jump_sd", 1.0));
    } else if (kind == "gamma") {
        m = LevyModel::gamma_process(b, c, r.number("shape"), r.number("rate"));
    } else if (kind == "bilateral_gamma") {
        m = LevyModel::bilateral_gamma(b, c, r.number("shape_pos"), r.number("rate_pos"),
                                       r.number("shape_neg"), r.number("rate_neg"));
    } else {
        fail("unknown levy kind '" + kind + "'", kind_v->line, kind_v->col,
             {"brownian", "compound_poisson", "merton", "gamma", "bilateral_gamma"});
    }
    r.finish();
    return m;
}

PhiKind lower_phi(const Value& v) {
    const Value& call = as_call(v, "phi");
    PhiKind phi;
    if (call.text == "constant") {
        ArgReader args(call, {"value"});
        phi.type = PhiKind::Type::constant;
        phi.value = args.number("value");
        args.finish();
        return phi;
    }
    if (call.text == "sigmoid_short_rate") {
        ArgReader args(call, {"lo", "hi", "center", "slope"});
        phi.type = PhiKind::Type::sigmoid_short_rate;
        phi.lo = args.number("lo");
        phi.hi = args.number("hi");
        phi.center = args.number("center");
        phi.slope = args.number("slope");
        args.finish();
        return phi;
    }
    fail("unknown phi kind '" + call.text + "'", call.line, call.col,
         {"constant", "sigmoid_short_rate"});
}

VolatilityTerm lower_term(const Entry& block) {
    BlockReader r(block);
    VolatilityTerm term;
    const Value* phi_v = r.find("phi");
    if (!phi_v) fail("missing key 'phi' in volatility term", block.line, block.col);
    term.phi = lower_phi(*phi_v);

    const Value* lam_v = r.find("lambda");
    if (!lam_v) fail("missing key 'lambda' in volatility term", block.line, block.col);
    if (lam_v->kind == Value::Kind::call && lam_v->text == "tabulated") {
        ArgReader args(*lam_v, {"file"});
        const Value* file = args.find("file");
        if (!file) fail("tabulated(...) requires a file path", lam_v->line, lam_v->col);
        term.is_tabulated = true;
        term.tabulated_path = as_string(*file, "tabulated file");
        args.finish();
    } else {
        term.lambda = lower_exp_poly(*lam_v, "lambda");
    }
    r.finish();
    return term;
}

std::vector<VolatilityTerm> lower_volatility(const Entry& block) {
    BlockReader r(block);
    std::vector<VolatilityTerm> terms;
    for (const Entry* child : r.blocks()) {
        if (child->name != "term")
            fail("unexpected block '" + child->name + "' in 'volatility'", child->line,
                 child->col, {"term"});
        terms.push_back(lower_term(*child));
    }
    if (terms.empty())
        fail("volatility block needs at least one term", block.line, block.col, {"term"});
    r.finish();
    return terms;
}

CurveSpaceConfig lower_space(const Entry& block) {
    BlockReader r(block);
    CurveSpaceConfig cfg;
    cfg.beta = r.number("beta", cfg.beta);
    cfg.beta_prime = r.number("beta_prime", cfg.beta_prime);
    cfg.x_max = r.number("x_max", cfg.x_max);
    if (const Value* v = r.find("n_grid")) cfg.n_grid = as_int(*v, "n_grid");
    r.finish();
    return cfg;
}

InitialCurve lower_initial_curve(const Entry& block) {
    BlockReader r(block);
    InitialCurve ic;
    const Value* flat = r.find("flat");
    const Value* poly = r.find("poly");
    const Value* file = r.find("file");
    const int given = (flat != nullptr) + (poly != nullptr) + (file != nullptr);
    if (given != 1)
        fail("initial_curve needs exactly one of flat, poly, file", block.line, block.col,
             {"flat", "poly", "file"});
    if (flat) {
        ic.type = InitialCurve::Type::flat;
        ic.flat_value = as_number(*flat, "flat");
    } else if (poly) {
        ic.type = InitialCurve::Type::exp_poly;
        ic.poly = lower_exp_poly(*poly, "poly");
    } else {
        ic.type = InitialCurve::Type::file;
        ic.path = as_string(*file, "file");
    }
    r.finish();
    return ic;
}

ModelSpec lower(const std::vector<Entry>& entries) {
    ModelSpec spec;
    const Entry* levy = nullptr;
    const Entry* volatility = nullptr;
    const Entry* space = nullptr;
    const Entry* k_interval = nullptr;
    const Entry* initial_curve = nullptr;

    auto bind = [](const Entry** slot, const Entry& e) {
        if (*slot) fail("duplicate block '" + e.name + "'", e.line, e.col);
        *slot = &e;
    };

    for (const auto& e : entries) {
        if (!e.is_block) {
            if (e.name == "version") {
                const int v = as_int(e.value, "version");
                if (v != 1) fail("unsupported version (expected 1)", e.value.line, e.value.col);
                spec.version = v;
                continue;
            }
            fail("unknown top-level key '" + e.name + "'", e.line, e.col, {"version"});
        }
        if (e.name == "levy") bind(&levy, e);
        else if (e.name == "volatility") bind(&volatility, e);
        else if (e.name == "space") bind(&space, e);
        else if (e.name == "k_interval") bind(&k_interval, e);
        else if (e.name == "initial_curve") bind(&initial_curve, e);
        else
            fail("unknown block '" + e.name + "'", e.line, e.col,
                 {"levy", "volatility", "space", "k_interval", "initial_curve"});
    }
    if (!levy) fail("missing required block 'levy'", 1, 1, {"levy"});
    if (!volatility) fail("missing required block 'volatility'", 1, 1, {"volatility"});
    if (!space) fail("missing required block 'space'", 1, 1, {"space"});

    spec.levy = lower_levy(*levy);
    spec.volatility = lower_volatility(*volatility);
    spec.space = lower_space(*space);
    if (k_interval) {
        BlockReader r(*k_interval);
        spec.k_lo = r.number("lo");
        spec.k_hi = r.number("hi");
        r.finish();
    }
    if (initial_curve) spec.initial_curve = lower_initial_curve(*initial_curve);
    return spec;
}

} // namespace

// ---------------------------------------------------------------------------
// Public parse / print
// ---------------------------------------------------------------------------

ParseResult parse(std::string_view text) {
    try {
        Parser parser(text);
        return lower(parser.parse_spec());
    } catch (const Fail& f) {
        return f.error;
    }
}

ParseResult parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return ParseError{"cannot open spec file: " + path, 0, 0, {}};
    std::ostringstream buffer;
    buffer << in.rdbuf();
    ParseResult result = parse(buffer.str());
    if (auto* spec = std::get_if<ModelSpec>(&result)) {
        const auto slash = path.find_last_of('/');
        spec->base_dir = (slash == std::string::npos) ? std::string(".") : path.substr(0, slash);
    }
    return result;
}

namespace {

void print_levy(std::ostream& os, const LevyModel& m) {
    os << "levy {\n";
    os << "  kind = " << m.kind_name() << "\n";
    os << "  b = " << format_double(m.b) << "\n";
    os << "  c = " << format_double(m.c) << "\n";
    switch (m.kind) {
        case LevyKind::brownian:
            break;
        case LevyKind::compound_poisson:
            os << "  intensity = " << format_double(m.intensity) << "\n";
            os << "  jumps = ";
            switch (m.jumps.kind) {
                case JumpKind::point_mass:
                    os << "point_mass(x0=" << format_double(m.jumps.x0) << ")";
                    break;
                case JumpKind::exponential:
                    os << "exponential(rate=" << format_double(m.jumps.rate) << ")";
                    break;
                case JumpKind::normal:
                    os << "normal(mean=" << format_double(m.jumps.mean)
                       << ", sd=" << format_double(m.jumps.sd) << ")";
                    break;
            }
            os << "\n";
            break;
        case LevyKind::merton:
            os << "  intensity = " << format_double(m.intensity) << "\n";
            os << "  jump_mean = " << format_double(m.jumps.mean) << "\n";
            os << "  jump_sd = " << format_double(m.jumps.sd) << "\n";
            break;
        case LevyKind::gamma:
            os << "  shape = " << format_double(m.shape) << "\n";
            os << "  rate = " << format_double(m.rate) << "\n";
            break;
        case LevyKind::bilateral_gamma:
            os << "  shape_pos = " << format_double(m.shape_pos) << "\n";
            os << "  rate_pos = " << format_double(m.rate_pos) << "\n";
            os << "  shape_neg = " << format_double(m.shape_neg) << "\n";
            os << "  rate_neg = " << format_double(m.rate_neg) << "\n";
            break;
    }
    os << "}\n";
}

void print_phi(std::ostream& os, const PhiKind& phi) {
    switch (phi.type) {
        case PhiKind::Type::constant:
            os << "constant(value=" << format_double(phi.value) << ")";
            break;
        case PhiKind::Type::sigmoid_short_rate:
            os << "sigmoid_short_rate(lo=" << format_double(phi.lo)
               << ", hi=" << format_double(phi.hi) << ", center=" << format_double(phi.center)
               << ", slope=" << format_double(phi.slope) << ")";
            break;
    }
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

std::string print(const ModelSpec& spec) {
    std::ostringstream os;
    os << "version = " << spec.version << "\n\n";
    print_levy(os, spec.levy);
    os << "\nvolatility {\n";
    for (const auto& term : spec.volatility) {
        os << "  term {\n";
        os << "    phi = ";
        print_phi(os, term.phi);
        os << "\n    lambda = ";
        if (term.is_tabulated) os << "tabulated(file=" << quote(term.tabulated_path) << ")";
        else os << term.lambda.to_string();
        os << "\n  }\n";
    }
    os << "}\n";
    os << "\nspace {\n";
    os << "  beta = " << format_double(spec.space.beta) << "\n";
    os << "  beta_prime = " << format_double(spec.space.beta_prime) << "\n";
    os << "  x_max = " << format_double(spec.space.x_max) << "\n";
    os << "  n_grid = " << spec.space.n_grid << "\n";
    os << "}\n";
    os << "\nk_interval {\n";
    os << "  lo = " << format_double(spec.k_lo) << "\n";
    os << "  hi = " << format_double(spec.k_hi) << "\n";
    os << "}\n";
    os << "\ninitial_curve {\n";
    switch (spec.initial_curve.type) {
        case InitialCurve::Type::flat:
            os << "  flat = " << format_double(spec.initial_curve.flat_value) << "\n";
            break;
        case InitialCurve::Type::exp_poly:
            os << "  poly = " << spec.initial_curve.poly.to_string() << "\n";
            break;
        case InitialCurve::Type::file:
            os << "  file = " << quote(spec.initial_curve.path) << "\n";
            break;
    }
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
    for (const auto& d : diagnostics)
        if (d.severity == Diagnostic::Severity::error) return true;
    return false;
}

std::vector<Diagnostic> validate(const ModelSpec& spec) {
    std::vector<Diagnostic> out;
    auto error = [&](const std::string& msg) {
        out.push_back({Diagnostic::Severity::error, msg});
    };
    auto warning = [&](const std::string& msg) {
        out.push_back({Diagnostic::Severity::warning, msg});
    };

    for (const auto& p : spec.space.check()) error("space: " + p);
    for (const auto& p : spec.levy.check()) error("levy: " + p);

    if (!(spec.k_lo < 0.0 && spec.k_hi > 0.0))
        error("k_interval must contain 0 in its interior");
    if (!domain_contains(spec.levy, spec.k_lo, spec.k_hi))
        error("k_interval is not contained in D(Psi) of the Levy model");

    if (spec.volatility.empty()) error("volatility needs at least one term");

    // Grid-dependent checks only make sense on a valid space.
    if (!spec.space.check().empty()) return out;
    ConfigPtr config = make_config(spec.space);

    // (c) each direction must lie in H^0_{beta'}.
    std::vector<ForwardCurve> lambda_grids;
    for (size_t i = 0; i < spec.volatility.size(); ++i) {
        const auto& term = spec.volatility[i];
        const std::string label = "volatility term " + std::to_string(i + 1);
        if (term.is_tabulated) {
            try {
                ForwardCurve lam = resolve_lambda(term, spec, config);
                lambda_grids.push_back(lam);
                if (!in_H0(lam))
                    error(label + ": tabulated lambda is not in H^0_{beta'} "
                                  "(tail or weighted norm violates the decay test)");
            } catch (const std::exception& e) {
                error(label + ": " + e.what());
            }
        } else {
            lambda_grids.push_back(evaluate_on_grid(term.lambda, config));
            if (!decay_check(term.lambda, spec.space.beta_prime))
                error(label + ": lambda decays too slowly for H^0_{beta'} "
                              "(needs every theta > beta_prime/2)");
        }
    }

    // (b) worst-case membership sigma in H^Psi_{beta,beta'}: with |Phi_i| <=
    // B_i the integrated volatility satisfies |int_0^x sigma| <= M(x), and
    // [-M, M] must fit inside K. This dominates every h in H_beta.
    if (!lambda_grids.empty() && lambda_grids.size() == spec.volatility.size()) {
        const double dx = config->dx();
        double bound_at_xmax = 0.0;
        double m_sup = 0.0, acc = 0.0;
        std::vector<double> prev(lambda_grids.size()), cur(lambda_grids.size());
        for (size_t t = 0; t < lambda_grids.size(); ++t)
            prev[t] = spec.volatility[t].phi.bound() * std::abs(lambda_grids[t][0]);
        for (int i = 1; i < config->n_grid; ++i) {
            double g = 0.0;
            for (size_t t = 0; t < lambda_grids.size(); ++t) {
                cur[t] = spec.volatility[t].phi.bound() * std::abs(lambda_grids[t][i]);
                g += 0.5 * dx * (prev[t] + cur[t]);
                prev[t] = cur[t];
            }
            acc += g;
            m_sup = std::max(m_sup, acc);
            if (i == config->n_grid - 1)
                for (double v : cur) bound_at_xmax += v;
        }
        if (!(-m_sup >= spec.k_lo && m_sup <= spec.k_hi)) {
            std::ostringstream os;
            os << "worst-case integrated volatility bound " << m_sup
               << " leaves K = [" << spec.k_lo << ", " << spec.k_hi
               << "]; sigma is not in H^Psi_{beta,beta'}";
            error(os.str());
        }
        if (bound_at_xmax > 1e-6)
            warning("volatility bound has not decayed at x_max; K-membership is "
                    "verified up to the grid horizon only");
    }

    return out;
}

} // namespace levyhjmm

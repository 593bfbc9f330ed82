#include "hope/model_parse.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <variant>

#include "hope/errors.hpp"

namespace hope {

namespace {

using json = nlohmann::json;

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

double read_decay(const json& t) {
    if (!t.contains("decay") || !t["decay"].is_number())
        throw UsageError("term '" + t.value("term", std::string{}) + "' needs a numeric \"decay\"");
    return t["decay"].get<double>();
}

std::string read_string(const json& t, const char* key) {
    if (!t.contains(key) || !t[key].is_string())
        throw UsageError("term '" + t.value("term", std::string{}) + "' needs a string \"" + key + "\"");
    return t[key].get<std::string>();
}

TermSpec term_from_json(const json& t) {
    if (!t.is_object() || !t.contains("term") || !t["term"].is_string())
        throw UsageError("each model term must be an object with a \"term\" name: " + t.dump());
    const auto name = lower(t["term"].get<std::string>());
    if (name == "edges") return term::Edges{};
    if (name == "gwesp") return term::Gwesp{read_decay(t)};
    if (name == "gwdegree" || name == "gwdeg") return term::Gwdegree{read_decay(t)};
    if (name == "nodecov") return term::NodeCov{read_string(t, "attr")};
    if (name == "edgecov") return term::EdgeCov{read_string(t, "matrix")};
    if (name == "nodematch") {
        const auto attr = read_string(t, "attr");
        const bool diff = t.value("diff", false);
        if (!diff) {
            if (t.contains("keep")) throw UsageError("nodematch keep requires diff=true");
            return term::NodeMatch{attr};
        }
        term::NodeMatchDiff d{attr, std::nullopt};
        if (t.contains("keep")) {
            const auto& k = t["keep"];
            if (k.is_number_integer()) d.keep = std::vector<int>{k.get<int>()};
            else if (k.is_array()) d.keep = k.get<std::vector<int>>();
            else throw UsageError("nodematch keep must be an integer or an integer array");
        }
        return d;
    }
    throw UsageError("unknown model term '" + name + "'");
}

// ---- formula parsing ----

struct Value {
    std::variant<double, std::string, bool, std::vector<double>> v;
};

class FormulaParser {
public:
    explicit FormulaParser(std::string_view s) : s_(s) {}

    ModelSpec parse() {
        ModelSpec spec;
        skip();
        if (at_end()) throw error("empty formula");
        for (;;) {
            spec.terms.push_back(term());
            skip();
            if (at_end()) break;
            expect('+');
        }
        return spec;
    }

private:
    TermSpec term() {
        const auto name = lower(identifier());
        std::vector<Value> positional;
        std::map<std::string, Value> named;
        skip();
        if (peek() == '(') {
            ++pos_;
            skip();
            if (peek() != ')') {
                for (;;) {
                    skip();
                    const auto save = pos_;
                    if (std::isalpha(static_cast<unsigned char>(peek()))) {
                        auto id = identifier();
                        skip();
                        if (peek() == '=') {
                            ++pos_;
                            named[lower(id)] = value();
                        } else {
                            pos_ = save;
                            positional.push_back(value());
                        }
                    } else {
                        positional.push_back(value());
                    }
                    skip();
                    if (peek() == ',') {
                        ++pos_;
                        continue;
                    }
                    expect(')');
                    break;
                }
            } else {
                ++pos_;
            }
        }

        auto take = [&](const std::string& key, std::size_t index) -> const Value* {
            if (auto it = named.find(key); it != named.end()) return &it->second;
            if (index < positional.size()) return &positional[index];
            return nullptr;
        };
        auto number = [&](const Value* v, const std::string& what) {
            if (!v || !std::holds_alternative<double>(v->v)) throw error(name + " needs numeric " + what);
            return std::get<double>(v->v);
        };
        auto text = [&](const Value* v, const std::string& what) {
            if (!v || !std::holds_alternative<std::string>(v->v)) throw error(name + " needs " + what);
            return std::get<std::string>(v->v);
        };
        auto flag = [&](const std::string& key, std::size_t index) {
            const Value* v = take(key, index);
            if (!v) return false;
            if (!std::holds_alternative<bool>(v->v)) throw error(name + ": " + key + " must be TRUE/FALSE");
            return std::get<bool>(v->v);
        };

        if (name == "edges") return term::Edges{};
        if (name == "gwesp" || name == "gwdegree" || name == "gwdeg") {
            const double decay = number(take("decay", 0), "decay");
            if (auto* f = take("fixed", 1); f && std::holds_alternative<bool>(f->v) && !std::get<bool>(f->v))
                throw error(name + ": estimated decay (fixed=FALSE) is not supported");
            if (name == "gwesp") return term::Gwesp{decay};
            return term::Gwdegree{decay};
        }
        if (name == "nodecov") return term::NodeCov{text(take("attr", 0), "an attribute name")};
        if (name == "edgecov") return term::EdgeCov{text(take("x", 0), "a covariate name")};
        if (name == "nodematch") {
            const auto attr = text(take("attr", 0), "an attribute name");
            const bool diff = flag("diff", 1);
            const Value* keep = take("keep", 2);
            if (!diff) {
                if (keep) throw error("nodematch keep requires diff=TRUE");
                return term::NodeMatch{attr};
            }
            term::NodeMatchDiff d{attr, std::nullopt};
            if (keep) {
                std::vector<double> levels;
                if (std::holds_alternative<double>(keep->v)) levels = {std::get<double>(keep->v)};
                else if (std::holds_alternative<std::vector<double>>(keep->v)) levels = std::get<std::vector<double>>(keep->v);
                else throw error("nodematch keep must be numeric");
                std::vector<int> k;
                for (double x : levels) {
                    if (x != std::floor(x)) throw error("nodematch keep must be integral");
                    k.push_back(static_cast<int>(x));
                }
                d.keep = std::move(k);
            }
            return d;
        }
        throw error("unknown model term '" + name + "'");
    }

    Value value() {
        skip();
        const char c = peek();
        if (c == '"' || c == '\'') {
            ++pos_;
            std::string out;
            while (!at_end() && peek() != c) out += s_[pos_++];
            expect(c);
            return {out};
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '+') {
            const double a = number_literal();
            skip();
            if (peek() == ':') {  // R integer range a:b
                ++pos_;
                const double b = number_literal();
                std::vector<double> seq;
                for (double x = a; x <= b; x += 1.0) seq.push_back(x);
                return {seq};
            }
            return {a};
        }
        const auto id = identifier();
        const auto lid = lower(id);
        skip();
        if (peek() == '(') {
            ++pos_;
            if (lid == "c") {
                std::vector<double> items;
                skip();
                if (peek() != ')') {
                    for (;;) {
                        Value v = value();
                        if (std::holds_alternative<double>(v.v)) items.push_back(std::get<double>(v.v));
                        else if (std::holds_alternative<std::vector<double>>(v.v)) {
                            const auto& r = std::get<std::vector<double>>(v.v);
                            items.insert(items.end(), r.begin(), r.end());
                        } else throw error("c() supports numbers only");
                        skip();
                        if (peek() == ',') {
                            ++pos_;
                            continue;
                        }
                        break;
                    }
                }
                expect(')');
                return {items};
            }
            if (lid == "log" || lid == "exp") {
                Value v = value();
                skip();
                expect(')');
                if (!std::holds_alternative<double>(v.v)) throw error(lid + "() needs a number");
                const double x = std::get<double>(v.v);
                return {lid == "log" ? std::log(x) : std::exp(x)};
            }
            throw error("unsupported function '" + id + "'");
        }
        if (lid == "t" || lid == "true") return {true};
        if (lid == "f" || lid == "false") return {false};
        return {id};  // bare attribute name
    }

    double number_literal() {
        skip();
        const auto start = pos_;
        if (peek() == '-' || peek() == '+') ++pos_;
        while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.' ||
                             peek() == 'e' || peek() == 'E' ||
                             ((peek() == '-' || peek() == '+') && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
            ++pos_;
        const std::string tok(s_.substr(start, pos_ - start));
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw error("bad number '" + tok + "'");
        }
    }

    std::string identifier() {
        skip();
        const auto start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '.'))
            ++pos_;
        if (pos_ == start) throw error("expected a name");
        return std::string(s_.substr(start, pos_ - start));
    }

    void expect(char c) {
        skip();
        if (peek() != c) throw error(std::string("expected '") + c + "'");
        ++pos_;
    }
    void skip() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }
    UsageError error(const std::string& msg) const {
        return UsageError("model formula, column " + std::to_string(pos_ + 1) + ": " + msg);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ModelSpec model_from_json(const json& j) {
    const json* arr = &j;
    if (j.is_object()) {
        if (!j.contains("terms")) throw UsageError("model JSON object needs a \"terms\" array");
        arr = &j["terms"];
    }
    if (!arr->is_array() || arr->empty()) throw UsageError("model needs a non-empty term array");
    ModelSpec spec;
    for (const auto& t : *arr) spec.terms.push_back(term_from_json(t));
    return spec;
}

json model_to_json(const ModelSpec& spec) {
    json terms = json::array();
    for (const auto& t : spec.terms) {
        json o;
        if (std::holds_alternative<term::Edges>(t)) {
            o["term"] = "edges";
        } else if (auto* g = std::get_if<term::Gwesp>(&t)) {
            o["term"] = "gwesp";
            o["decay"] = g->decay;
        } else if (auto* d = std::get_if<term::Gwdegree>(&t)) {
            o["term"] = "gwdegree";
            o["decay"] = d->decay;
        } else if (auto* m = std::get_if<term::NodeMatch>(&t)) {
            o["term"] = "nodematch";
            o["attr"] = m->attr;
        } else if (auto* md = std::get_if<term::NodeMatchDiff>(&t)) {
            o["term"] = "nodematch";
            o["attr"] = md->attr;
            o["diff"] = true;
            if (md->keep) o["keep"] = *md->keep;
        } else if (auto* c = std::get_if<term::NodeCov>(&t)) {
            o["term"] = "nodecov";
            o["attr"] = c->attr;
        } else if (auto* e = std::get_if<term::EdgeCov>(&t)) {
            o["term"] = "edgecov";
            o["matrix"] = e->matrix;
        }
        terms.push_back(std::move(o));
    }
    return json{{"terms", terms}};
}

ModelSpec parse_formula(std::string_view formula) { return FormulaParser(formula).parse(); }

std::string to_formula(const ModelSpec& spec) {
    std::string out;
    for (const auto& t : spec.terms) {
        if (!out.empty()) out += " + ";
        if (std::holds_alternative<term::Edges>(t)) out += "edges";
        else if (auto* g = std::get_if<term::Gwesp>(&t)) out += "gwesp(" + num(g->decay) + ")";
        else if (auto* d = std::get_if<term::Gwdegree>(&t)) out += "gwdegree(" + num(d->decay) + ")";
        else if (auto* m = std::get_if<term::NodeMatch>(&t)) out += "nodematch(\"" + m->attr + "\")";
        else if (auto* md = std::get_if<term::NodeMatchDiff>(&t)) {
            out += "nodematch(\"" + md->attr + "\", diff=TRUE";
            if (md->keep) {
                out += ", keep=c(";
                for (std::size_t k = 0; k < md->keep->size(); ++k)
                    out += (k ? "," : "") + std::to_string((*md->keep)[k]);
                out += ")";
            }
            out += ")";
        } else if (auto* c = std::get_if<term::NodeCov>(&t)) out += "nodecov(\"" + c->attr + "\")";
        else if (auto* e = std::get_if<term::EdgeCov>(&t)) out += "edgecov(\"" + e->matrix + "\")";
    }
    return out;
}

ModelSpec parse_model_argument(const std::string& arg) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(arg, ec)) {
        std::ifstream in(arg);
        try {
            return model_from_json(json::parse(in));
        } catch (const json::exception& e) {
            throw UsageError("model file " + arg + ": " + e.what());
        }
    }
    const auto first = arg.find_first_not_of(" \t\n");
    if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
        try {
            return model_from_json(json::parse(arg));
        } catch (const json::exception& e) {
            throw UsageError(std::string("inline model JSON: ") + e.what());
        }
    }
    return parse_formula(arg);
}

}  // namespace hope

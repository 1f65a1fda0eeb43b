#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "replicator/errors.hpp"

namespace replicator {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Short tag naming one opinion ("A", "B", "E", ...).
class OpinionLabel {
public:
    explicit OpinionLabel(std::string name) : name_(std::move(name))
    {
        if (name_.empty())
            throw Error(ErrorCode::InvalidMatrix, "opinion label must be nonempty");
        for (char c : name_) {
            if (std::isspace(static_cast<unsigned char>(c)))
                throw Error(ErrorCode::InvalidMatrix, "opinion label '" + name_ + "' contains whitespace");
        }
    }

    const std::string& str() const noexcept { return name_; }

    friend bool operator==(const OpinionLabel&, const OpinionLabel&) = default;

private:
    std::string name_;
};

/// Square game table; entry (i, j) is the payoff to opinion i meeting opinion j.
class PayoffMatrix {
public:
    PayoffMatrix(std::vector<OpinionLabel> labels, Matrix entries)
        : labels_(std::move(labels)), entries_(std::move(entries))
    {
        const auto n = static_cast<Eigen::Index>(labels_.size());
        if (entries_.rows() != entries_.cols())
            throw Error(ErrorCode::InvalidMatrix, "payoff matrix must be square");
        if (n < 2)
            throw Error(ErrorCode::InvalidMatrix, "payoff matrix needs at least two opinions");
        if (entries_.rows() != n)
            throw Error(ErrorCode::InvalidMatrix, "label count does not match matrix dimension");
        if (!entries_.allFinite())
            throw Error(ErrorCode::InvalidMatrix, "payoff entries must be finite");
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            for (std::size_t j = i + 1; j < labels_.size(); ++j) {
                if (labels_[i] == labels_[j])
                    throw Error(ErrorCode::InvalidMatrix, "duplicate opinion label '" + labels_[i].str() + "'");
            }
        }
    }

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<OpinionLabel>& labels() const noexcept { return labels_; }
    const Matrix& entries() const noexcept { return entries_; }
    double operator()(std::size_t i, std::size_t j) const
    {
        return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    std::optional<std::size_t> index_of(std::string_view label) const
    {
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i].str() == label)
                return i;
        }
        return std::nullopt;
    }

    std::vector<std::string> label_names() const
    {
        std::vector<std::string> out;
        out.reserve(labels_.size());
        for (const auto& l : labels_)
            out.push_back(l.str());
        return out;
    }

    friend bool operator==(const PayoffMatrix& a, const PayoffMatrix& b)
    {
        return a.labels_ == b.labels_ && a.entries_ == b.entries_;
    }

private:
    std::vector<OpinionLabel> labels_;
    Matrix entries_;
};

enum class BaseGame { BSO, BDO };

struct Preference {
    std::string target;
    double delta = 0.0;
};

/// Declarative description of one of the coordination-game variants.
struct ModelSpec {
    BaseGame base = BaseGame::BSO;
    std::optional<double> equivocator_r;
    std::optional<Preference> preference;

    bool has_equivocator() const noexcept { return equivocator_r.has_value(); }

    /// Short model name, e.g. "BSO", "BDOE", "BSOEP_A".
    std::string name() const
    {
        std::string out = base == BaseGame::BSO ? "BSO" : "BDO";
        if (equivocator_r)
            out += "E";
        if (preference)
            out += "P_" + preference->target;
        return out;
    }
};

namespace detail {

inline bool in_open_unit(double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; }

inline std::string fmt_param(double v)
{
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

inline void check_open_unit(double v, const char* name)
{
    if (!in_open_unit(v))
        throw Error(ErrorCode::ParameterOutOfRange,
                    std::string(name) + " = " + fmt_param(v) + " must lie in (0,1)");
}

} // namespace detail

/// Similarity between two of the opinions A, B and E for equivocator distance r.
/// S(A,B) = 0, S(E,A) = r, S(E,B) = 1 - r, S(X,X) = 1.
inline double similarity(double r, std::string_view p, std::string_view q)
{
    detail::check_open_unit(r, "r");
    auto valid = [](std::string_view s) { return s == "A" || s == "B" || s == "E"; };
    if (!valid(p) || !valid(q))
        throw Error(ErrorCode::UnknownPreferenceTarget,
                    "similarity is defined on the opinions A, B and E only");
    if (p == q)
        return 1.0;
    if (p > q)
        std::swap(p, q);
    // p < q lexicographically: (A,B), (A,E), (B,E)
    if (p == "A" && q == "B")
        return 0.0;
    if (p == "A")
        return r;
    return 1.0 - r;
}

/// Distance D = 1 - S, spelled out so that BDO entries equal r and 1 - r exactly.
inline double distance(double r, std::string_view p, std::string_view q)
{
    similarity(r, p, q); // validates
    if (p == q)
        return 0.0;
    if (p > q)
        std::swap(p, q);
    if (p == "A" && q == "B")
        return 1.0;
    return p == "A" ? 1.0 - r : r;
}

inline void validate(const ModelSpec& spec)
{
    if (spec.equivocator_r)
        detail::check_open_unit(*spec.equivocator_r, "r");
    if (spec.preference) {
        detail::check_open_unit(spec.preference->delta, "delta");
        const auto& t = spec.preference->target;
        const bool known = t == "A" || t == "B" || (t == "E" && spec.equivocator_r);
        if (!known)
            throw Error(ErrorCode::UnknownPreferenceTarget,
                        "preferred opinion '" + t + "' is not an opinion of " + spec.name());
    }
}

/// Payoff matrix of a model. BSO pays the similarity of the two opinions,
/// BDO pays their distance (1 - similarity); a preferred opinion gets delta
/// added to its whole row.
inline PayoffMatrix build(const ModelSpec& spec)
{
    validate(spec);
    std::vector<std::string> names = {"A", "B"};
    if (spec.equivocator_r)
        names.emplace_back("E");
    const auto n = static_cast<Eigen::Index>(names.size());

    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (spec.equivocator_r) {
                const double r = *spec.equivocator_r;
                m(i, j) = spec.base == BaseGame::BSO ? similarity(r, names[i], names[j])
                                                     : distance(r, names[i], names[j]);
            } else {
                const bool same = i == j;
                m(i, j) = (spec.base == BaseGame::BSO) == same ? 1.0 : 0.0;
            }
        }
    }

    std::vector<OpinionLabel> labels;
    for (auto& s : names)
        labels.emplace_back(s);
    PayoffMatrix plain(std::move(labels), std::move(m));
    if (!spec.preference)
        return plain;

    const auto row = *plain.index_of(spec.preference->target);
    Matrix shifted = plain.entries();
    shifted.row(static_cast<Eigen::Index>(row)).array() += spec.preference->delta;
    return PayoffMatrix(plain.labels(), std::move(shifted));
}

/// Plain-text matrix format: a line of labels followed by n rows of n reals.
inline PayoffMatrix read_matrix(std::istream& in)
{
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        rows.push_back(line);
    }
    if (rows.empty())
        throw Error(ErrorCode::ParseError, "matrix file is empty");

    std::vector<OpinionLabel> labels;
    {
        std::istringstream ls(rows.front());
        std::string tok;
        while (ls >> tok)
            labels.emplace_back(tok);
    }
    const auto n = labels.size();
    if (rows.size() != n + 1)
        throw Error(ErrorCode::ParseError, "expected " + std::to_string(n) + " matrix rows after the label line, got " +
                                               std::to_string(rows.size() - 1));

    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        std::istringstream rs(rows[i + 1]);
        std::string tok;
        std::size_t j = 0;
        while (rs >> tok) {
            if (j >= n)
                throw Error(ErrorCode::ParseError, "row " + std::to_string(i + 1) + " has too many entries");
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size())
                throw Error(ErrorCode::ParseError, "cannot parse matrix entry '" + tok + "'");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j++)) = v;
        }
        if (j != n)
            throw Error(ErrorCode::ParseError, "row " + std::to_string(i + 1) + " has too few entries");
    }
    return PayoffMatrix(std::move(labels), std::move(m));
}

/// Writes with 17 significant digits so read_matrix restores identical entries.
inline void write_matrix(std::ostream& out, const PayoffMatrix& a)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        out << (i ? " " : "") << a.labels()[i].str();
    out << '\n';
    const auto old = out.precision(17);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j)
            out << (j ? " " : "") << a(i, j);
        out << '\n';
    }
    out.precision(old);
}

/// key=value model description (keys: base, r, delta, preferred).
inline ModelSpec read_model_config(std::istream& in)
{
    ModelSpec spec;
    bool have_base = false;
    std::optional<double> delta;
    std::optional<std::string> preferred;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    auto number = [&](const std::string& v, const std::string& key) {
        std::size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(v, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != v.size() || v.empty())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad number for " + key);
        return d;
    };

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected key=value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "base") {
            if (value == "bso" || value == "BSO")
                spec.base = BaseGame::BSO;
            else if (value == "bdo" || value == "BDO")
                spec.base = BaseGame::BDO;
            else
                throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": base must be bso or bdo");
            have_base = true;
        } else if (key == "r") {
            spec.equivocator_r = number(value, key);
        } else if (key == "delta") {
            delta = number(value, key);
        } else if (key == "preferred") {
            preferred = value;
        } else {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    if (!have_base)
        throw Error(ErrorCode::ParseError, "model config lacks 'base'");
    if (preferred && !delta)
        throw Error(ErrorCode::ParseError, "'preferred' given without 'delta'");
    if (delta)
        spec.preference = Preference{preferred.value_or("A"), *delta};
    validate(spec);
    return spec;
}

} // namespace replicator

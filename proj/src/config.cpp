#include "thiele/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "thiele/errors.hpp"

namespace thiele {

namespace {

using nlohmann::json;

const json& require(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError("missing key '" + (where.empty() ? key : where + "." + key) + "'");
    return j.at(key);
}

double require_number(const json& j, const std::string& key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_number())
        throw ParseError("key '" + where + "." + key + "' must be a number");
    return v.get<double>();
}

// Multiplicative duration dependence of a rate/payment table entry.
struct DurationFactor {
    enum class Kind { none, exp, step } kind = Kind::none;
    double exp_rate = 0.0;
    PiecewiseCurve table;

    double operator()(double u) const {
        switch (kind) {
            case Kind::none: return 1.0;
            case Kind::exp: return std::exp(exp_rate * u);
            case Kind::step: return table(u);
        }
        return 1.0;
    }
    double sup_factor(double horizon) const {
        switch (kind) {
            case Kind::none: return 1.0;
            case Kind::exp: return std::max(1.0, std::exp(exp_rate * horizon));
            case Kind::step: return table.max_abs();
        }
        return 1.0;
    }
};

struct TableEntry {
    PiecewiseCurve curve;
    DurationFactor duration;

    double operator()(double t, double u) const { return curve(t) * duration(u); }
    double sup(double horizon) const { return curve.max_abs() * duration.sup_factor(horizon); }
};

PiecewiseCurve parse_curve(const json& j, const std::string& where, bool nonnegative) {
    std::vector<double> breakpoints;
    std::vector<std::vector<double>> coeffs;
    if (j.contains("value")) {
        breakpoints = {0.0};
        coeffs = {{require_number(j, "value", where)}};
    } else {
        const json& bp = require(j, "breakpoints", where);
        const json& vals = require(j, "values", where);
        if (!bp.is_array() || !vals.is_array() || bp.size() != vals.size() || bp.empty())
            throw ParseError("'" + where +
                             "' needs equally long, non-empty breakpoints/values arrays");
        for (const auto& b : bp) breakpoints.push_back(b.get<double>());
        for (const auto& v : vals) {
            if (v.is_number())
                coeffs.push_back({v.get<double>()});
            else if (v.is_array()) {
                std::vector<double> row;
                for (const auto& c : v) row.push_back(c.get<double>());
                coeffs.push_back(std::move(row));
            } else
                throw ParseError("'" + where + ".values' entries must be numbers or arrays");
        }
    }
    if (nonnegative)
        for (const auto& row : coeffs)
            if (row.size() == 1 && row[0] < 0.0)
                throw ValidationError("negative rate in '" + where + "'");
    try {
        return PiecewiseCurve::polynomial(std::move(breakpoints), std::move(coeffs));
    } catch (const ValidationError& e) {
        throw ValidationError("'" + where + "': " + e.what());
    }
}

DurationFactor parse_duration_factor(const json& j, const std::string& where) {
    DurationFactor f;
    if (!j.contains("duration_factor")) return f;
    const json& d = j.at("duration_factor");
    const std::string kind = require(d, "kind", where + ".duration_factor").get<std::string>();
    if (kind == "exp") {
        f.kind = DurationFactor::Kind::exp;
        f.exp_rate = require_number(d, "rate", where + ".duration_factor");
    } else if (kind == "step") {
        f.kind = DurationFactor::Kind::step;
        f.table = parse_curve(d, where + ".duration_factor", true);
    } else {
        throw ParseError("'" + where + ".duration_factor.kind' must be 'exp' or 'step'");
    }
    return f;
}

// Dense (from, to, mode/state) -> entry tables behind shared ownership so
// the std::function fields of the spec stay cheap to copy.
template <typename Key>
using Table = std::map<Key, TableEntry>;

void collect_breakpoints(std::set<double>& out, const TableEntry& e) {
    for (double b : e.curve.breakpoints()) out.insert(b);
}

} // namespace

ContractSpec load_contract(const std::string& config_text) {
    json doc;
    try {
        doc = json::parse(config_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }

    ContractSpec spec;
    spec.horizon = require_number(doc, "horizon", "");
    if (!(std::isfinite(spec.horizon) && spec.horizon > 0.0))
        throw ValidationError("horizon must be positive and finite");
    const double T = spec.horizon;

    // States and modes.
    {
        const json& st = require(doc, "states", "");
        for (const auto& l : require(st, "labels", "states"))
            spec.states.labels.push_back(l.get<std::string>());
        spec.states.validate();
        spec.states.initial_state =
            spec.states.index_of(require(st, "initial", "states").get<std::string>());
        if (doc.contains("modes")) {
            const json& md = doc.at("modes");
            for (const auto& l : require(md, "labels", "modes"))
                spec.modes.labels.push_back(l.get<std::string>());
            spec.modes.validate();
            spec.modes.initial_mode =
                spec.modes.index_of(require(md, "initial", "modes").get<std::string>());
        } else {
            spec.modes.labels = {"standard"};
            spec.modes.initial_mode = 0;
        }
    }
    const std::size_t ns = spec.states.size();
    const std::size_t nm = spec.modes.size();

    auto state_of = [&](const json& j, const char* key, const std::string& where) {
        return spec.states.index_of(require(j, key, where).get<std::string>());
    };
    auto mode_of = [&](const json& j, const char* key, const std::string& where) {
        return spec.modes.index_of(require(j, key, where).get<std::string>());
    };
    // Entries without a "mode" ("state") key apply to every mode (state).
    auto modes_of = [&](const json& j, const std::string& where) {
        std::vector<ModeId> ks;
        if (j.contains("mode"))
            ks.push_back(mode_of(j, "mode", where));
        else
            for (ModeId k = 0; k < nm; ++k) ks.push_back(k);
        return ks;
    };
    auto states_of = [&](const json& j, const std::string& where) {
        std::vector<StateId> is;
        if (j.contains("state"))
            is.push_back(state_of(j, "state", where));
        else
            for (StateId i = 0; i < ns; ++i) is.push_back(i);
        return is;
    };

    std::set<double> intensity_knots, payment_knots;

    // Intensities.
    {
        const json& in = require(doc, "intensities", "");
        const std::string kind = require(in, "kind", "intensities").get<std::string>();
        if (kind == "markov")
            spec.intensities.kind = ModelKind::markov;
        else if (kind == "semi_markov")
            spec.intensities.kind = ModelKind::semi_markov;
        else
            throw ParseError("'intensities.kind' must be 'markov' or 'semi_markov'");

        auto state_table = std::make_shared<Table<std::tuple<StateId, StateId, ModeId>>>();
        if (in.contains("state")) {
            std::size_t idx = 0;
            for (const auto& e : in.at("state")) {
                const std::string where = "intensities.state[" + std::to_string(idx++) + "]";
                const StateId i = state_of(e, "from", where);
                const StateId j = state_of(e, "to", where);
                if (i == j) throw ParseError("'" + where + "': from == to");
                TableEntry entry{parse_curve(e, where, true), parse_duration_factor(e, where)};
                if (spec.intensities.kind == ModelKind::markov &&
                    entry.duration.kind != DurationFactor::Kind::none)
                    throw ValidationError("'" + where +
                                          "': duration factors need a semi_markov contract");
                collect_breakpoints(intensity_knots, entry);
                for (ModeId k : modes_of(e, where))
                    (*state_table)[{i, j, k}] = entry;
            }
        }
        spec.intensities.state_rates = [state_table](double t, StateId i, StateId j, ModeId k,
                                                     double u) {
            auto it = state_table->find({i, j, k});
            return it == state_table->end() ? 0.0 : it->second(t, u);
        };

        auto mode_table = std::make_shared<Table<std::tuple<ModeId, ModeId, StateId>>>();
        if (in.contains("mode")) {
            std::size_t idx = 0;
            for (const auto& e : in.at("mode")) {
                const std::string where = "intensities.mode[" + std::to_string(idx++) + "]";
                const ModeId k = mode_of(e, "from", where);
                const ModeId l = mode_of(e, "to", where);
                if (k == l) throw ParseError("'" + where + "': from == to");
                TableEntry entry{parse_curve(e, where, true), {}};
                collect_breakpoints(intensity_knots, entry);
                for (StateId i : states_of(e, where))
                    (*mode_table)[{k, l, i}] = entry;
            }
        }
        spec.intensities.mode_rates = [mode_table](double t, ModeId k, ModeId l, StateId i) {
            auto it = mode_table->find({k, l, i});
            return it == mode_table->end() ? 0.0 : it->second(t, 0.0);
        };

        if (in.contains("rate_bound")) {
            spec.intensities.rate_bound = require_number(in, "rate_bound", "intensities");
            if (spec.intensities.rate_bound < 0.0)
                throw ValidationError("intensities.rate_bound must be nonnegative");
        } else {
            // Exact supremum for step tables; polynomial tables should
            // declare the bound explicitly.
            double bound = 0.0;
            for (StateId i = 0; i < ns; ++i)
                for (ModeId k = 0; k < nm; ++k) {
                    double total = 0.0;
                    for (StateId j = 0; j < ns; ++j)
                        if (auto it = state_table->find({i, j, k}); it != state_table->end())
                            total += it->second.sup(T);
                    for (ModeId l = 0; l < nm; ++l)
                        if (auto it = mode_table->find({k, l, i}); it != mode_table->end())
                            total += it->second.sup(T);
                    bound = std::max(bound, total);
                }
            spec.intensities.rate_bound = bound * (1.0 + 1e-9);
        }
    }

    // Payments.
    {
        const json& pay = require(doc, "payments", "");

        auto sojourn = std::make_shared<Table<std::pair<StateId, ModeId>>>();
        if (pay.contains("sojourn")) {
            std::size_t idx = 0;
            for (const auto& e : pay.at("sojourn")) {
                const std::string where = "payments.sojourn[" + std::to_string(idx++) + "]";
                const StateId i = state_of(e, "state", where);
                TableEntry entry{parse_curve(e, where, false), parse_duration_factor(e, where)};
                collect_breakpoints(payment_knots, entry);
                for (ModeId k : modes_of(e, where)) (*sojourn)[{i, k}] = entry;
            }
        }
        spec.payments.sojourn_rate = [sojourn, T](double t, StateId i, ModeId k, double u) {
            if (t > T) return 0.0;
            auto it = sojourn->find({i, k});
            return it == sojourn->end() ? 0.0 : it->second(t, u);
        };

        auto lumps = std::make_shared<std::map<std::tuple<double, StateId, ModeId>, double>>();
        std::set<double> atom_times;
        if (pay.contains("lump")) {
            std::size_t idx = 0;
            for (const auto& e : pay.at("lump")) {
                const std::string where = "payments.lump[" + std::to_string(idx++) + "]";
                const double time = require_number(e, "time", where);
                if (time < 0.0 || time > T)
                    throw ValidationError("'" + where + "': lump atom outside [0, horizon]");
                const double amount = require_number(e, "amount", where);
                const StateId i = state_of(e, "state", where);
                for (ModeId k : modes_of(e, where)) (*lumps)[{time, i, k}] = amount;
                atom_times.insert(time);
            }
        }
        spec.payments.lump_times.assign(atom_times.begin(), atom_times.end());
        spec.payments.lump_amount = [lumps, T](double t, StateId i, ModeId k, double) {
            if (t > T) return 0.0;
            auto it = lumps->find({t, i, k});
            return it == lumps->end() ? 0.0 : it->second;
        };

        auto state_pay = std::make_shared<Table<std::tuple<StateId, StateId, ModeId>>>();
        if (pay.contains("state_transition")) {
            std::size_t idx = 0;
            for (const auto& e : pay.at("state_transition")) {
                const std::string where =
                    "payments.state_transition[" + std::to_string(idx++) + "]";
                const StateId i = state_of(e, "from", where);
                const StateId j = state_of(e, "to", where);
                TableEntry entry{parse_curve(e, where, false), parse_duration_factor(e, where)};
                collect_breakpoints(payment_knots, entry);
                for (ModeId k : modes_of(e, where)) (*state_pay)[{i, j, k}] = entry;
            }
        }
        spec.payments.state_transition_payment = [state_pay, T](double t, StateId i, StateId j,
                                                                ModeId k, double u) {
            if (t > T) return 0.0;
            auto it = state_pay->find({i, j, k});
            return it == state_pay->end() ? 0.0 : it->second(t, u);
        };

        auto mode_pay = std::make_shared<Table<std::tuple<ModeId, ModeId, StateId>>>();
        if (pay.contains("mode_transition")) {
            std::size_t idx = 0;
            for (const auto& e : pay.at("mode_transition")) {
                const std::string where =
                    "payments.mode_transition[" + std::to_string(idx++) + "]";
                const ModeId k = mode_of(e, "from", where);
                const ModeId l = mode_of(e, "to", where);
                TableEntry entry{parse_curve(e, where, false), parse_duration_factor(e, where)};
                collect_breakpoints(payment_knots, entry);
                for (StateId i : states_of(e, where)) (*mode_pay)[{k, l, i}] = entry;
            }
        }
        spec.payments.mode_transition_payment = [mode_pay, T](double t, ModeId k, ModeId l,
                                                              StateId i, double u) {
            if (t > T) return 0.0;
            auto it = mode_pay->find({k, l, i});
            return it == mode_pay->end() ? 0.0 : it->second(t, u);
        };

        if (pay.contains("surrender_fraction")) {
            std::size_t idx = 0;
            for (const auto& e : pay.at("surrender_fraction")) {
                const std::string where =
                    "payments.surrender_fraction[" + std::to_string(idx++) + "]";
                const StateId i = state_of(e, "from", where);
                const StateId j = state_of(e, "to", where);
                const double f = require_number(e, "fraction", where);
                if (f < 0.0 || f > 1.0)
                    throw ValidationError("'" + where + "': fraction outside [0, 1]");
                spec.payments.surrender_reserve_fraction[{i, j}] = f;
            }
        }
    }

    // Discount.
    {
        const json& disc = require(doc, "discount", "");
        spec.discount.rate = parse_curve(disc, "discount", false);
        spec.discount.bound = disc.contains("bound") ? require_number(disc, "bound", "discount")
                                                     : spec.discount.rate.max_abs();
        for (double b : spec.discount.rate.breakpoints())
            if (b > 0.0 && b < T) payment_knots.insert(b);
    }

    if (doc.contains("options")) {
        const json& opt = doc.at("options");
        if (opt.contains("duration_resets_on_mode_jump"))
            spec.duration_resets_on_mode_jump =
                opt.at("duration_resets_on_mode_jump").get<bool>();
    }

    for (double b : intensity_knots)
        if (b > 0.0 && b < T) spec.intensities.breakpoints.push_back(b);
    for (double b : payment_knots)
        if (b > 0.0 && b < T) spec.payments.breakpoints.push_back(b);

    spec.validate();
    return spec;
}

ContractSpec load_contract_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open contract file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_contract(buf.str());
}

} // namespace thiele

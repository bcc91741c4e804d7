#include "fndam/dam_array.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "fndam/errors.hpp"
#include "fndam/rng.hpp"
#include "fndam/util.hpp"

namespace fndam {

using nlohmann::json;

std::string to_string(MismatchDistribution d) {
    return d == MismatchDistribution::gaussian ? "gaussian" : "uniform";
}

MismatchDistribution mismatch_distribution_from(const std::string& name) {
    if (name == "gaussian") {
        return MismatchDistribution::gaussian;
    }
    if (name == "uniform") {
        return MismatchDistribution::uniform;
    }
    throw ArgumentError(fmt::format("unknown mismatch distribution '{}'", name));
}

DamArray DamArray::build(std::size_t n, const FnParams& nominal, double v0, const MismatchSpec& mismatch) {
    if (n == 0) {
        throw ArgumentError("build_array: need at least one cell");
    }
    nominal.validate();
    if (!std::isfinite(mismatch.relative_sigma) || mismatch.relative_sigma < 0.0) {
        throw DomainError(fmt::format("mismatch sigma must be >= 0 (got {})", mismatch.relative_sigma));
    }

    Rng rng(mismatch.seed);
    const double sigma = mismatch.relative_sigma;
    const double half_width = std::sqrt(3.0) * sigma;  // uniform with the same std
    auto draw = [&] {
        return mismatch.distribution == MismatchDistribution::gaussian ? sigma * rng.gaussian()
                                                                       : rng.uniform(-half_width, half_width);
    };

    DamArray a;
    a.nominal_ = nominal;
    a.mismatch_ = mismatch;
    a.v0_ = v0;
    a.cells_.reserve(n);
    a.draws_.reserve(n);
    std::vector<std::size_t> failed;
    for (std::size_t i = 0; i < n; ++i) {
        MismatchDraw d;
        d.set_k1 = draw();
        d.set_k2 = draw();
        d.reset_k1 = draw();
        d.reset_k2 = draw();
        FnParams set = nominal;
        FnParams reset = nominal;
        set.k1 *= 1.0 + d.set_k1;
        set.k2 *= 1.0 + d.set_k2;
        reset.k1 *= 1.0 + d.reset_k1;
        reset.k2 *= 1.0 + d.reset_k2;
        try {
            a.cells_.push_back(synchronize(set, reset, v0));
        } catch (const Error&) {
            failed.push_back(i);
            a.cells_.emplace_back();
        }
        a.draws_.push_back(d);
    }
    if (!failed.empty()) {
        std::string list;
        for (auto i : failed) {
            list += (list.empty() ? "" : ", ") + std::to_string(i);
        }
        throw InitializationError(fmt::format("build_array: could not synchronize cells [{}]", list));
    }
    a.rng_draws_ = rng.draws();
    return a;
}

std::vector<WeightReading> DamArray::batch_read(kernels::Exec exec) const {
    std::vector<WeightReading> out(cells_.size());
    kernels::read(cells_, out, exec);
    return out;
}

namespace {

void check_indices(std::size_t size, std::vector<std::size_t> indices) {
    for (auto i : indices) {
        if (i >= size) {
            throw ArgumentError(fmt::format("cell index {} out of range (array has {} cells)", i, size));
        }
    }
    std::sort(indices.begin(), indices.end());
    const auto dup = std::adjacent_find(indices.begin(), indices.end());
    if (dup != indices.end()) {
        throw ArgumentError(fmt::format("cell {} targeted more than once in one batch", *dup));
    }
}

}  // namespace

void DamArray::batch_pulse(std::span<const PulseTarget> targets, double min_wall) {
    if (!(min_wall >= 0.0)) {
        throw ArgumentError(fmt::format("batch_pulse: negative wall time {}", min_wall));
    }
    std::vector<std::size_t> idx;
    double wall = min_wall;
    for (const auto& t : targets) {
        t.pulse.validate();
        idx.push_back(t.index);
        wall = std::max(wall, t.pulse.duration);
    }
    check_indices(cells_.size(), idx);

    std::vector<DamCell> next = cells_;
    std::vector<char> hit(cells_.size(), 0);
    for (const auto& t : targets) {
        next[t.index] = decay(program_pulse(cells_[t.index], t.pulse, t.polarity), wall - t.pulse.duration);
        hit[t.index] = 1;
    }
    const double clock = global_clock_ + wall;
    const auto n = static_cast<std::ptrdiff_t>(cells_.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (!hit[i]) {
            next[i] = decay(cells_[i], wall);
        }
        next[i].clock = clock;
    }
    cells_.swap(next);
    global_clock_ = clock;
}

void DamArray::batch_train(std::span<const TrainTarget> targets) {
    std::vector<std::size_t> idx;
    double wall = 0.0;
    for (const auto& t : targets) {
        t.pulse.validate();
        if (t.n_pulses == 0 || !(t.frequency > 0.0)) {
            throw ArgumentError("batch_train: need n_pulses >= 1 and frequency > 0");
        }
        idx.push_back(t.index);
        wall = std::max(wall, static_cast<double>(t.n_pulses) / t.frequency);
    }
    check_indices(cells_.size(), idx);

    std::vector<DamCell> next = cells_;
    std::vector<char> hit(cells_.size(), 0);
    for (const auto& t : targets) {
        const double own = static_cast<double>(t.n_pulses) / t.frequency;
        next[t.index] = decay(program_train(cells_[t.index], t.pulse, t.n_pulses, t.frequency, t.polarity),
                              std::max(0.0, wall - own));
        hit[t.index] = 1;
    }
    const double clock = global_clock_ + wall;
    const auto n = static_cast<std::ptrdiff_t>(cells_.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (!hit[i]) {
            next[i] = decay(cells_[i], wall);
        }
        next[i].clock = clock;
    }
    cells_.swap(next);
    global_clock_ = clock;
}

void DamArray::advance(double dt, kernels::Exec exec) {
    if (!(dt >= 0.0)) {
        throw DomainError(fmt::format("advance: negative dt {}", dt));
    }
    kernels::advance(cells_, dt, exec);
    global_clock_ += dt;
}

json params_to_json(const FnParams& p) {
    return json{{"k1", p.k1},
                {"k2", p.k2},
                {"c_total", p.c_total},
                {"c_couple", p.c_couple},
                {"quantize_charge", p.quantize_charge}};
}

FnParams params_from_json(const json& j, const std::string& path) {
    JsonReader r(j, path);
    r.expect_keys({"k1", "k2", "c_total", "c_couple", "quantize_charge"});
    FnParams p;
    p.k1 = r.number("k1");
    p.k2 = r.number("k2");
    p.c_total = r.number("c_total");
    p.c_couple = r.number("c_couple");
    p.quantize_charge = r.has("quantize_charge") ? r.boolean("quantize_charge") : false;
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ParseError(path, e.what());
    }
    return p;
}

namespace {

json node_to_json(const NodeState& s, const FnParams& p) {
    return json{{"params", params_to_json(p)}, {"v_fg", s.v_fg}, {"k0", s.k0}};
}

void node_from_json(const JsonReader& r, NodeState& s, FnParams& p) {
    r.expect_keys({"params", "v_fg", "k0"});
    p = params_from_json(r.at("params").node(), r.path() + "/params");
    s.v_fg = r.number("v_fg");
    s.k0 = r.number("k0");
    if (!(s.v_fg > 0.0)) {
        throw ParseError(r.path() + "/v_fg", "node voltage must be > 0");
    }
    if (!(s.k0 >= 1.0)) {
        throw ParseError(r.path() + "/k0", "k0 must be >= 1");
    }
}

}  // namespace

json DamArray::save_state() const {
    json cells = json::array();
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const auto& c = cells_[i];
        const auto& d = draws_[i];
        cells.push_back(json{{"draw", {d.set_k1, d.set_k2, d.reset_k1, d.reset_k2}},
                             {"weight_scale", c.weight_scale},
                             {"clock", c.clock},
                             {"set", node_to_json(c.set_node, c.set_params)},
                             {"reset", node_to_json(c.reset_node, c.reset_params)}});
    }
    json payload{{"v0", v0_},
                 {"global_clock", global_clock_},
                 {"nominal", params_to_json(nominal_)},
                 {"mismatch",
                  {{"relative_sigma", mismatch_.relative_sigma},
                   {"seed", mismatch_.seed},
                   {"distribution", to_string(mismatch_.distribution)}}},
                 {"rng", {{"algorithm", Rng::algorithm}, {"seed", mismatch_.seed}, {"draws", rng_draws_}}},
                 {"cells", std::move(cells)}};
    const std::string checksum = sha256_hex(payload.dump());
    return json{{"format", kArrayStateFormat},
                {"schema_version", kArrayStateSchemaVersion},
                {"checksum", checksum},
                {"payload", std::move(payload)}};
}

DamArray DamArray::load_state(const json& doc) {
    JsonReader root(doc, "");
    root.expect_keys({"format", "schema_version", "checksum", "payload"});
    if (root.string("format") != kArrayStateFormat) {
        throw ParseError("/format", fmt::format("expected '{}'", kArrayStateFormat));
    }
    if (root.unsigned_integer("schema_version") != kArrayStateSchemaVersion) {
        throw ParseError("/schema_version",
                         fmt::format("unsupported schema version (this build reads {})", kArrayStateSchemaVersion));
    }
    const JsonReader payload = root.at("payload");
    if (sha256_hex(payload.node().dump()) != root.string("checksum")) {
        throw ParseError("/checksum", "checksum does not match payload");
    }
    payload.expect_keys({"v0", "global_clock", "nominal", "mismatch", "rng", "cells"});

    DamArray a;
    a.v0_ = payload.number("v0");
    a.global_clock_ = payload.number("global_clock");
    a.nominal_ = params_from_json(payload.at("nominal").node(), "/payload/nominal");

    const JsonReader mm = payload.at("mismatch");
    mm.expect_keys({"relative_sigma", "seed", "distribution"});
    a.mismatch_.relative_sigma = mm.number("relative_sigma");
    a.mismatch_.seed = mm.unsigned_integer("seed");
    try {
        a.mismatch_.distribution = mismatch_distribution_from(mm.string("distribution"));
    } catch (const ArgumentError& e) {
        throw ParseError(mm.path() + "/distribution", e.what());
    }

    const JsonReader rng = payload.at("rng");
    rng.expect_keys({"algorithm", "seed", "draws"});
    if (rng.string("algorithm") != Rng::algorithm) {
        throw ParseError(rng.path() + "/algorithm", fmt::format("unsupported generator (expected {})", Rng::algorithm));
    }
    if (rng.unsigned_integer("seed") != a.mismatch_.seed) {
        throw ParseError(rng.path() + "/seed", "generator seed differs from mismatch seed");
    }
    a.rng_draws_ = rng.unsigned_integer("draws");

    const JsonReader cells = payload.at("cells");
    const std::size_t n = cells.array_size();
    if (n == 0) {
        throw ParseError(cells.path(), "array has no cells");
    }
    a.cells_.resize(n);
    a.draws_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const JsonReader c = cells.at(i);
        c.expect_keys({"draw", "weight_scale", "clock", "set", "reset"});
        const JsonReader d = c.at("draw");
        if (d.array_size() != 4) {
            throw ParseError(d.path(), "expected four mismatch draws");
        }
        a.draws_[i] = {d.at(0).number(), d.at(1).number(), d.at(2).number(), d.at(3).number()};
        auto& cell = a.cells_[i];
        cell.weight_scale = c.number("weight_scale");
        cell.clock = c.number("clock");
        if (cell.clock != a.global_clock_) {
            throw ParseError(c.path() + "/clock", "cell clock differs from the global clock");
        }
        node_from_json(c.at("set"), cell.set_node, cell.set_params);
        node_from_json(c.at("reset"), cell.reset_node, cell.reset_params);
    }
    return a;
}

void DamArray::write_weights_csv(std::ostream& os) const {
    os << "cell_id,weight_mV,set_V,reset_V\n";
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const auto& c = cells_[i];
        os << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", i, weight_of(c), c.set_node.v_fg, c.reset_node.v_fg);
    }
}

}  // namespace fndam

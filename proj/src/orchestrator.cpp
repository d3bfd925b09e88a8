#include "depotsim/orchestrator.hpp"

#include <algorithm>
#include <cmath>

#include "depotsim/errors.hpp"
#include "depotsim/metrics.hpp"

namespace depotsim {

namespace {

constexpr int kMaxHalvings = 5;
constexpr double kTimeEps = 1e-9;

double amount_free(const AxiMesh& m, std::span<const double> c, double n) {
    return n * integrate(c, m);
}

}  // namespace

double DoseLedger::closure_error() const {
    if (!(injected > 0.0)) return 0.0;
    return std::abs(injected - (free + bound + absorbed + eliminated + outflow)) / injected;
}

double electroneutrality_residual(const FieldState& s, double z_cl) {
    double worst = 0.0;
    double na_max = 0.0;
    for (std::size_t k = 0; k < s.c_na.size(); ++k) {
        const double q = s.c_na[k] + s.c_h[k] + s.z_mab[k] * s.c_mab[k] + z_cl * s.c_cl[k];
        worst = std::max(worst, std::abs(q));
        na_max = std::max(na_max, s.c_na[k]);
    }
    return na_max > 0.0 ? worst / na_max : worst;
}

Simulation::Simulation(SimulationConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    mesh_ = std::make_unique<AxiMesh>(build_graded_mesh(cfg_.radius, cfg_.height, cfg_.mesh.fine_nr,
                                                        cfg_.mesh.fine_nz, 0.0,
                                                        cfg_.height - cfg_.protocol.depth, cfg_.mesh.grading));
    syringe_ = cfg_.syringe();
    build_solvers();
    initialize_state();
    next_dt_ = cfg_.plan.short_dt;
}

Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

Simulation Simulation::restore(SimulationConfig cfg, Phase phase, AxiMesh mesh, FieldState state,
                               DoseLedger ledger, StepStats stats, double next_dt) {
    Simulation sim;
    sim.cfg_ = std::move(cfg);
    sim.cfg_.validate();
    sim.phase_ = phase;
    sim.mesh_ = std::make_unique<AxiMesh>(std::move(mesh));
    sim.syringe_ = sim.cfg_.syringe();
    sim.build_solvers();
    sim.state_ = std::move(state);
    if (sim.state_.c_na.size() != sim.mesh_->node_count()) {
        throw ConfigError("checkpoint fields do not match the checkpoint mesh");
    }
    sim.ledger_ = ledger;
    sim.stats_ = stats;
    sim.next_dt_ = next_dt > 0.0 ? next_dt : (phase == Phase::short_term ? sim.cfg_.plan.short_dt
                                                                           : sim.cfg_.plan.long_dt_min);
    return sim;
}

double Simulation::source_center_z() const { return cfg_.height - cfg_.protocol.depth; }

void Simulation::build_solvers() {
    const AxiMesh& m = *mesh_;
    potential_ = std::make_unique<PotentialSolver>(m);
    transport_ = std::make_unique<TransportSolver>(m, cfg_.species, cfg_.constants);
    if (phase_ == Phase::short_term) {
        pressure_ = std::make_unique<PressureSolver>(m, cfg_.layers, cfg_.starling, cfg_.viscosity);
        source_ = std::make_unique<InjectionSource>(m, cfg_.protocol);
    } else {
        pressure_.reset();
        source_.reset();
    }
}

void Simulation::initialize_state() {
    const AxiMesh& m = *mesh_;
    const std::size_t nn = m.node_count();
    FieldState& s = state_;
    s.t = 0.0;
    s.c_na.assign(nn, cfg_.species.sodium.c_init);
    s.c_h.assign(nn, cfg_.species.hydrogen.c_init);
    s.c_mab.assign(nn, cfg_.species.antibody.c_init);
    s.c_b.assign(nn, 0.0);
    s.binding_release.assign(nn, 0.0);
    s.phi.assign(nn, 0.0);
    const NodalField q(nn, 0.0);
    s.p = pressure_->solve(q);
    s.u = pressure_->velocity(s.p, q);
    s.lymph_rate = pressure_->lymph_exchange(s.p);
    for (double& v : s.lymph_rate) v = std::max(v, 0.0);
    refresh_derived();
    recount_ledger();
}

void Simulation::refresh_derived() {
    FieldState& s = state_;
    std::size_t floored = 0;
    s.ph = update_tissue_ph(s.c_h, &floored);
    stats_.ph_floored += floored;
    s.z_mab.resize(s.ph.size());
    s.c_cl.resize(s.ph.size());
    for (std::size_t k = 0; k < s.ph.size(); ++k) {
        s.z_mab[k] = charge_at_ph(cfg_.charge_curve, s.ph[k]);
        s.c_cl[k] = recover_chloride(s.c_na[k], s.c_h[k], s.c_mab[k], s.z_mab[k], cfg_.species.chloride.valence);
        if (s.c_cl[k] < 0.0) ++stats_.negative_chloride;
    }
}

void Simulation::recount_ledger() {
    ledger_.free = amount_free(*mesh_, state_.c_mab, cfg_.layers.porosity);
    ledger_.bound = integrate(state_.c_b, *mesh_);
}

void Simulation::attempt_step(double dt) {
    const AxiMesh& m = *mesh_;
    const std::size_t nn = m.node_count();
    const double n = cfg_.layers.porosity;
    const FieldState& old = state_;
    FieldState s;
    s.t = old.t + dt;

    // (1) flow and potential
    NodalField q;
    double delivered = 0.0;
    if (phase_ == Phase::short_term) {
        // Step-averaged rate keeps the injected amount exact for any dt.
        delivered = cfg_.protocol.delivered(old.t, s.t);
        q = source_->unit_profile();
        for (double& v : q) v *= delivered / dt;
        s.p = pressure_->solve(q);
        s.u = pressure_->velocity(s.p, q);
        s.lymph_rate = pressure_->lymph_exchange(s.p);
        for (double& v : s.lymph_rate) v = std::max(v, 0.0);
    } else {
        s.p = old.p;
        s.u = old.u;
        s.lymph_rate = old.lymph_rate;
    }
    const PotentialCoefficients coeffs =
        assemble_potential(m, cfg_.species, cfg_.constants, n, {old.c_na, old.c_h, old.c_mab}, old.z_mab,
                           s.lymph_rate, old.binding_release);
    s.phi = potential_->solve(coeffs);

    // (2) species transport; binding exchange is applied in (3)
    TransportStepInputs in;
    in.dt = dt;
    in.velocity = &s.u;
    in.phi = s.phi;
    in.q_p = q;
    in.z_mab = old.z_mab;
    in.lymph_rate = s.lymph_rate;
    in.syringe = syringe_;
    in.porosity = n;
    TransportReport rep;
    SpeciesFields next = transport_->advance({old.c_na, old.c_h, old.c_mab}, in, &rep);

    // (3) pH, rates, binding
    s.ph = update_tissue_ph(next.hydrogen);
    s.c_b.resize(nn);
    s.binding_release.resize(nn);
    double bound_loss = 0.0;
    NodalField eliminated(nn, 0.0);
    for (std::size_t k = 0; k < nn; ++k) {
        const RatePair r = rates_at_ph(cfg_.binding, s.ph[k]);
        const Exchange e = exchange_binding(next.antibody[k], old.c_b[k], r.k_a, r.k_d, cfg_.binding.k_e, n,
                                            cfg_.binding.b_max, dt);
        next.antibody[k] = e.c_mab;
        s.c_b[k] = e.c_b;
        eliminated[k] = cfg_.binding.k_e * e.c_b;
        s.binding_release[k] = -(e.c_b - old.c_b[k]) / dt - eliminated[k];
    }
    if (cfg_.binding.k_e > 0.0) bound_loss = dt * integrate(eliminated, m);

    // (4) chloride recovery and derived fields
    s.c_na = std::move(next.sodium);
    s.c_h = std::move(next.hydrogen);
    s.c_mab = std::move(next.antibody);

    state_ = std::move(s);
    stats_.clipped += rep.clipped;
    if (rep.direct_fallback) ++stats_.direct_fallbacks;
    refresh_derived();

    ledger_.injected += syringe_.c_mab * delivered;
    ledger_.absorbed += dt * rep.lymph_uptake;
    ledger_.outflow += dt * rep.boundary_outflow[2];
    ledger_.eliminated += bound_loss;
    recount_ledger();
    ++stats_.steps;
}

void Simulation::step_staggered(double dt) {
    auto run = [this](auto&& self, double h, int depth) -> void {
        try {
            attempt_step(h);
        } catch (const SolverError& e) {
            if (depth >= kMaxHalvings) {
                throw SolverError(std::string("step failed after ") + std::to_string(kMaxHalvings) +
                                  " dt halvings at t = " + std::to_string(state_.t) + " s: " + e.what());
            }
            ++stats_.retries;
            self(self, 0.5 * h, depth + 1);
            self(self, 0.5 * h, depth + 1);
        }
    };
    run(run, dt, 0);
}

void Simulation::run_short_term(const Observer& observer) {
    if (phase_ != Phase::short_term) throw SolverError("run_short_term: simulation is already in the long phase");
    const double horizon = cfg_.plan.short_horizon;
    const double cadence = cfg_.output.short_cadence_s;
    if (observer && state_.t <= kTimeEps) observer(*this);
    double next_out = (std::floor(state_.t / cadence + kTimeEps) + 1.0) * cadence;
    while (state_.t < horizon - kTimeEps) {
        const double dt = std::min({cfg_.plan.short_dt, horizon - state_.t, next_out - state_.t});
        step_staggered(dt);
        if (state_.t >= next_out - kTimeEps || state_.t >= horizon - kTimeEps) {
            if (state_.t >= next_out - kTimeEps) next_out += cadence;
            if (observer) observer(*this);
        }
    }
}

ReductionReport Simulation::reduce_to_long_term() {
    if (phase_ != Phase::short_term) throw SolverError("reduce_to_long_term: already reduced");
    const AxiMesh& fine = *mesh_;
    const double n = cfg_.layers.porosity;
    ReductionReport report;

    AxiMesh coarse = build_graded_mesh(cfg_.radius, cfg_.height, cfg_.plan.coarse_nr, cfg_.plan.coarse_nz, 0.0,
                                       source_center_z(), 1.0);
    const double drug_before = amount_free(fine, state_.c_mab, n) + integrate(state_.c_b, fine);
    report.rho_avg_before = domain_average(net_charge_density(state_.c_mab, state_.z_mab), fine);

    FieldState s;
    s.t = state_.t;
    s.c_na = project_field(fine, state_.c_na, coarse).field;
    s.c_h = project_field(fine, state_.c_h, coarse).field;
    s.c_mab = project_field(fine, state_.c_mab, coarse).field;
    s.c_b = project_field(fine, state_.c_b, coarse).field;
    s.phi = project_field(fine, state_.phi, coarse).field;
    for (double& v : s.c_h) v = std::max(v, 1e-16);

    const double drug_after = n * integrate(s.c_mab, coarse) + integrate(s.c_b, coarse);
    if (drug_before > 0.0) {
        report.relative_mass_change = (drug_after - drug_before) / drug_before;
        report.warning = std::abs(report.relative_mass_change) > 0.05;
        const double scale = drug_after > 0.0 ? drug_before / drug_after : 1.0;
        const double b_max = cfg_.binding.b_max;
        for (std::size_t k = 0; k < s.c_mab.size(); ++k) {
            s.c_mab[k] *= scale;
            s.c_b[k] *= scale;
            if (s.c_b[k] > b_max) {  // move the excess to the free pool at the same node
                s.c_mab[k] += (s.c_b[k] - b_max) / n;
                s.c_b[k] = b_max;
            }
        }
    }

    phase_ = Phase::long_term;
    mesh_ = std::make_unique<AxiMesh>(std::move(coarse));
    const AxiMesh& m = *mesh_;
    const std::size_t nn = m.node_count();

    PressureSolver steady(m, cfg_.layers, cfg_.starling, cfg_.viscosity);
    const NodalField q(nn, 0.0);
    s.p = steady.solve(q);
    s.lymph_rate = steady.lymph_exchange(s.p);
    for (double& v : s.lymph_rate) v = std::max(v, 0.0);
    s.u = FaceVelocity::zero(m);
    s.binding_release.assign(nn, 0.0);
    state_ = std::move(s);
    build_solvers();
    refresh_derived();
    recount_ledger();
    report.rho_avg_after = domain_average(net_charge_density(state_.c_mab, state_.z_mab), m);
    next_dt_ = cfg_.plan.long_dt_min;
    return report;
}

void Simulation::run_long_term(const Observer& observer, std::optional<double> until_s) {
    if (phase_ != Phase::long_term) throw SolverError("run_long_term: reduce_to_long_term has not run");
    const double end = until_s.value_or(cfg_.plan.short_horizon + cfg_.plan.long_horizon_h * 3600.0);
    const double cadence = cfg_.output.long_cadence_h * 3600.0;
    double next_out = (std::floor(state_.t / cadence + kTimeEps) + 1.0) * cadence;
    while (state_.t < end - kTimeEps) {
        const double target = std::min(end, next_out);
        const double dt = std::min(next_dt_, target - state_.t);
        step_staggered(dt);
        if (dt >= next_dt_ * (1.0 - 1e-12)) {
            next_dt_ = std::min(next_dt_ * cfg_.plan.long_dt_growth, cfg_.plan.long_dt_max);
        }
        if (state_.t >= next_out - kTimeEps) {
            next_out += cadence;
            if (observer) observer(*this);
        } else if (state_.t >= end - kTimeEps && observer) {
            observer(*this);
        }
    }
}

void Simulation::advance_to(double t_s) {
    if (t_s < state_.t - kTimeEps) throw ConfigError("requested time lies before the checkpoint time");
    if (phase_ == Phase::short_term) {
        const double stop = std::min(t_s, cfg_.plan.short_horizon);
        while (state_.t < stop - kTimeEps) step_staggered(std::min(cfg_.plan.short_dt, stop - state_.t));
        if (t_s <= cfg_.plan.short_horizon + kTimeEps) return;
        reduce_to_long_term();
    }
    run_long_term({}, t_s);
}

}  // namespace depotsim

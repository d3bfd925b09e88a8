#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "depotsim/binding.hpp"
#include "depotsim/config.hpp"
#include "depotsim/darcy.hpp"
#include "depotsim/mesh.hpp"
#include "depotsim/potential.hpp"
#include "depotsim/transport.hpp"

namespace depotsim {

/// Nodal unknowns plus derived fields of one simulation instant.
struct FieldState {
    double t = 0.0;
    NodalField c_na;
    NodalField c_h;
    NodalField c_mab;
    NodalField c_b;
    NodalField c_cl;   // recovered from electroneutrality
    NodalField p;
    NodalField phi;
    NodalField ph;
    NodalField z_mab;
    NodalField lymph_rate;       // J_l, 1/s
    NodalField binding_release;  // phi_B of the last step, mol/cm^3/s
    FaceVelocity u;
};

/// Running drug totals in mol.
struct DoseLedger {
    double injected = 0.0;
    double free = 0.0;        // integral of n c_mAb
    double bound = 0.0;       // integral of c_B
    double absorbed = 0.0;    // cumulative lymphatic uptake
    double eliminated = 0.0;  // cumulative k_e loss from the bound pool
    double outflow = 0.0;     // cumulative advective loss through r = R

    /// |injected - (free + bound + absorbed + eliminated + outflow)| / injected.
    double closure_error() const;
};

enum class Phase { short_term, long_term };

struct StepStats {
    std::size_t steps = 0;
    std::size_t retries = 0;
    std::size_t clipped = 0;
    std::size_t direct_fallbacks = 0;
    std::size_t ph_floored = 0;
    std::size_t negative_chloride = 0;
};

struct ReductionReport {
    double relative_mass_change = 0.0;  // before rescale
    double rho_avg_before = 0.0;
    double rho_avg_after = 0.0;
    bool warning = false;
};

/// max_k |sum_i z_i c_i| / max(c_Na) including the recovered chloride.
double electroneutrality_residual(const FieldState& s, double z_cl = -1.0);

/// Staggered driver owning the mesh, solvers, state and ledger of a single
/// simulation. Not thread-safe; concurrent runs use separate instances.
class Simulation {
public:
    using Observer = std::function<void(const Simulation&)>;

    explicit Simulation(SimulationConfig cfg);
    ~Simulation();
    Simulation(Simulation&&) noexcept;
    Simulation& operator=(Simulation&&) noexcept;

    /// Rebuilds a simulation from checkpointed pieces.
    static Simulation restore(SimulationConfig cfg, Phase phase, AxiMesh mesh, FieldState state,
                              DoseLedger ledger, StepStats stats, double next_dt);

    const SimulationConfig& config() const { return cfg_; }
    const AxiMesh& mesh() const { return *mesh_; }
    const FieldState& state() const { return state_; }
    const DoseLedger& ledger() const { return ledger_; }
    const StepStats& stats() const { return stats_; }
    Phase phase() const { return phase_; }
    double source_center_z() const;
    double next_dt() const { return next_dt_; }

    /// One staggered step of size dt: flow and potential, species
    /// transport, pH and binding, chloride recovery, ledger. A rejected
    /// step is retried as two half steps, at most five levels deep.
    void step_staggered(double dt);

    /// Steps to the short horizon. `observer` runs at t = 0, at every output
    /// cadence point and at the end.
    void run_short_term(const Observer& observer = {});

    /// Moves the state onto the coarse mesh with free and bound drug
    /// rescaled to the pre-projection totals; fixes u = 0, q_p = 0 and the
    /// steady-pressure J_l for the rest of the run.
    ReductionReport reduce_to_long_term();

    /// Steps to `until_s` (default: the long horizon) with geometric dt ramp.
    void run_long_term(const Observer& observer = {}, std::optional<double> until_s = std::nullopt);

    /// Advances in whichever phase is active up to time `t_s` without output.
    void advance_to(double t_s);

private:
    Simulation() = default;
    void build_solvers();
    void initialize_state();
    void attempt_step(double dt);
    void refresh_derived();
    void recount_ledger();

    SimulationConfig cfg_;
    Phase phase_ = Phase::short_term;
    std::unique_ptr<AxiMesh> mesh_;
    std::unique_ptr<PressureSolver> pressure_;
    std::unique_ptr<PotentialSolver> potential_;
    std::unique_ptr<TransportSolver> transport_;
    std::unique_ptr<InjectionSource> source_;
    FieldState state_;
    DoseLedger ledger_;
    StepStats stats_;
    SyringeComposition syringe_;
    double next_dt_ = 0.0;
};

}  // namespace depotsim

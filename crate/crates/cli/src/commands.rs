//! One function per subcommand, each turning a resolved config into a table.

use floquet_aah::observables::MATCHING_RULE;
use floquet_aah::spectral::RESIDUAL_TOLERANCE;
use floquet_aah::{
    compare_effective, eigendecompose, hc_curve, ipr, ipr_scaling, kappa_fit, loschmidt_echo, omega_c_search,
    omega_m_search, one_period, phase_grid, HcMethod, PhaseCell, QuenchSpec, Workers,
};

use crate::config::{Resolved, Task};
use crate::error::CliError;
use crate::output::{num, Table};

pub fn run(r: &Resolved) -> Result<Table, CliError> {
    // the CLI sizes the global pool once, so the library always sees Workers(0)
    let workers = Workers(0);
    let p = &r.params;
    match &r.task {
        Task::Spectrum => {
            let spec = eigendecompose(&one_period(p)?, p.omega())?;
            let mut t = Table::new(&["lambda", "eps_real", "eps_imag", "ipr", "residual"]);
            t.note("residual_tolerance", num(RESIDUAL_TOLERANCE));
            for (i, m) in spec.modes().iter().enumerate() {
                t.push(vec![
                    i.to_string(),
                    num(m.quasi_energy.re),
                    num(m.quasi_energy.im),
                    num(ipr(&m.vector)?),
                    num(m.residual),
                ]);
            }
            Ok(t)
        }
        Task::PhaseDiagram { h_range, omega_range, nh, nomega } => {
            let grid = phase_grid(p, *h_range, *omega_range, *nh, *nomega, r.search.eta, workers)?;
            let mut t = Table::new(&["h", "omega", "max_abs_imag", "avg_ipr", "complex_fraction"]);
            for cell in &grid.cells {
                match cell {
                    PhaseCell::Point(pt) => t.push(vec![
                        num(pt.h),
                        num(pt.omega),
                        num(pt.max_abs_imag),
                        num(pt.avg_ipr),
                        num(pt.complex_fraction),
                    ]),
                    PhaseCell::Failed { h, omega, reason } => {
                        t.note("failed", format!("h={h} omega={omega}: {reason}"));
                        t.push(vec![num(*h), num(*omega), "NaN".into(), "NaN".into(), "NaN".into()]);
                    }
                }
            }
            Ok(t)
        }
        Task::HcCurve { omegas, method } => {
            let curve = hc_curve(p, omegas, *method, &r.search, workers)?;
            let mut t = Table::new(&["omega", "hc", "censored"]);
            t.note("method", if *method == HcMethod::ExactPropagator { "exact" } else { "effective" });
            for i in 0..omegas.len() {
                t.push(vec![num(curve.omegas[i]), num(curve.hc_values[i]), curve.censored[i].to_string()]);
            }
            Ok(t)
        }
        Task::OmegaM { search } => {
            let found = omega_m_search(p, search, &r.search, workers)?;
            let mut t = Table::new(&["omega", "hc"]);
            t.note("omega_m", num(found.omega_m));
            t.note("hc_max", num(found.hc_max));
            for (w, hc) in &found.evaluations {
                t.push(vec![num(*w), num(*hc)]);
            }
            Ok(t)
        }
        Task::KappaFit { hoppings, coarse_n } => {
            let fit = kappa_fit(hoppings, p, *coarse_n, &r.search, workers)?;
            let mut t = Table::new(&["hopping", "omega_m", "hc_max"]);
            t.note("kappa", num(fit.kappa));
            t.note("fit_residual", num(fit.fit_residual));
            for (j, peak) in fit.hoppings.iter().zip(&fit.peaks) {
                t.push(vec![num(*j), num(peak.omega_m), num(peak.hc_max)]);
            }
            Ok(t)
        }
        Task::OmegaC { h_floor, bracket, omega_tol } => {
            let found = omega_c_search(p, *h_floor, *bracket, *omega_tol, r.search.eta)?;
            let mut t = Table::new(&["omega_c", "h_floor"]);
            t.push(vec![num(found.omega_c), num(found.h_floor)]);
            Ok(t)
        }
        Task::Scaling { target_eps_real, lengths } => {
            let result = ipr_scaling(p, *target_eps_real, lengths, r.search.eta)?;
            let mut t = Table::new(&["branch", "L", "eps_real", "eps_imag", "ipr"]);
            t.note("matching", MATCHING_RULE);
            t.note("gamma_extended", num(result.extended.fit.gamma));
            t.note("gamma_localized", num(result.localized.fit.gamma));
            t.note("fit_residual_extended", num(result.extended.fit.fit_residual));
            t.note("fit_residual_localized", num(result.localized.fit.fit_residual));
            for (name, branch) in [("extended", &result.extended), ("localized", &result.localized)] {
                for m in &branch.tracked {
                    t.push(vec![
                        name.to_string(),
                        m.sites.to_string(),
                        num(m.quasi_energy.re),
                        num(m.quasi_energy.im),
                        num(m.ipr),
                    ]);
                }
            }
            Ok(t)
        }
        Task::Echo { pre_h, post_h, periods, record_every, selector } => {
            let q = QuenchSpec {
                pre: p.with_h(*pre_h)?,
                post: p.with_h(*post_h)?,
                selector: *selector,
                periods: *periods,
                record_every: *record_every,
            };
            let series = loschmidt_echo(&q)?;
            let mut t = Table::new(&["period", "time", "echo", "log_norm"]);
            t.note("initial_index", series.initial_index);
            t.note("initial_eps_real", num(series.initial_quasi_energy.re));
            t.note("initial_eps_imag", num(series.initial_quasi_energy.im));
            t.note("initial_ipr", num(series.initial_ipr));
            t.note("time_average", num(series.time_average()));
            for pt in &series.points {
                t.push(vec![pt.period.to_string(), num(pt.time), num(pt.echo), num(pt.log_norm)]);
            }
            Ok(t)
        }
        Task::CompareEffective { omegas } => {
            let cmp = compare_effective(p, omegas, &r.search, workers)?;
            let mut t = Table::new(&["omega", "hc_exact", "hc_effective_order2"]);
            for i in 0..omegas.len() {
                t.push(vec![num(cmp.omegas[i]), num(cmp.hc_exact[i]), num(cmp.hc_effective[i])]);
            }
            Ok(t)
        }
    }
}

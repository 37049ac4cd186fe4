use crate::prelude::*;

/// How the NO branch is paid for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    /// Fall back to teleportation with pre-shared entanglement.
    Teleport,
    /// Re-encode the leftover state and send it again, round after round.
    Retry,
}

/// Costs and rates of the failure-branch strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub mode: RateMode,
    /// `1 − Π` of the first round.
    pub epsilon: f64,
    /// Carriers needed to re-send the NO-branch state,
    /// `n·log₂3 + log₂[d_M²(d_M²+1)]`.
    pub n1: f64,
    /// Average e-bits per transmitted qubit, `(1 − Π)·log₂3`.
    pub teleport_ebits: f64,
    /// Average classical bits per transmitted qubit, `2(1 − Π)·log₂3`.
    pub teleport_cbits: f64,
    /// Rate after 1, 2, … retry rounds (empty in teleport mode).
    pub retry_rate_sequence: Vec<f64>,
    /// `1 − ε·log₂3` when it is positive.
    pub asymptotic_rate: Option<f64>,
}

/// Resource accounting for `n` qubits sent through a link whose mediator
/// has dimension `d_m`. `pi_values` holds `Π` of each round; retry mode
/// needs them all equal. Values up to rounding above 1 are clamped.
pub fn resource_accounting(n: usize, pi_values: &[f64], d_m: usize, mode: RateMode) -> Result<RateReport> {
    if let Some(bad) = pi_values.iter().find(|p| !(**p > 0.0 && **p <= 1.0 + crate::ARITHMETIC_TOL)) {
        return Err(Error::InvalidArgument(alloc::format!("Π = {bad} is outside (0, 1]")));
    }
    let pi_values: Vec<f64> = pi_values.iter().map(|p| p.min(1.0)).collect();
    let &pi = pi_values.first().ok_or_else(|| Error::InvalidArgument("at least one Π value is required".into()))?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let log3 = 3f64.log2();
    let epsilon = 1.0 - pi;
    let dm2 = (d_m as f64).powi(2);
    let overhead = (dm2 * (dm2 + 1.0)).log2();
    let n1 = n as f64 * log3 + overhead;
    let asymptotic = 1.0 - epsilon * log3;
    let mut retry_rate_sequence = Vec::new();
    if mode == RateMode::Retry {
        if pi_values.iter().any(|p| (p - pi).abs() > crate::ARITHMETIC_TOL) {
            return Err(Error::InvalidArgument("retry accounting needs a uniform Π".into()));
        }
        if epsilon * log3 >= 1.0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "ε·log₂3 = {} ≥ 1: retries never converge",
                epsilon * log3
            )));
        }
        // Round r re-sends n_r = n_{r−1}·log₂3 + overhead carriers and is
        // needed with probability (1 − Π)^r.
        let mut carriers = n as f64;
        let mut expected_uses = n as f64;
        let mut reach = 1.0;
        for _ in 0..pi_values.len() {
            carriers = carriers * log3 + overhead;
            reach *= epsilon;
            expected_uses += carriers * reach;
            retry_rate_sequence.push(n as f64 / expected_uses);
        }
    }
    Ok(RateReport {
        mode,
        epsilon,
        n1,
        teleport_ebits: epsilon * log3,
        teleport_cbits: 2.0 * epsilon * log3,
        retry_rate_sequence,
        asymptotic_rate: (asymptotic > 0.0).then_some(asymptotic),
    })
}

//! Arrival timetable for one round.

use serde::{Deserialize, Serialize};

use super::{Mode, ProtocolConfig, ProtocolError};

/// Send and expected-arrival times for every message of a round. Classical
/// signals travel at light speed (one distance unit per time unit), the
/// quantum signal at the configured fraction of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timetable {
    pub q_send: f64,
    pub q_arrival: f64,
    pub x_send: f64,
    pub y_send: f64,
    pub classical_arrival: f64,
    /// Commit broadcast leaves the prover at quantum arrival.
    pub commit_broadcast: f64,
    pub commit_v0: f64,
    pub commit_v1: f64,
    /// Answer broadcast leaves the prover at classical arrival.
    pub answer_broadcast: f64,
    pub answer_v0: f64,
    pub answer_v1: f64,
}

/// Computes the round timetable with `x` sent from V0 at `t0`.
///
/// `x` and `y` co-arrive at the prover; in commit mode they arrive a time
/// `delay` after the quantum signal, which is dispatched early enough to
/// compensate for its slower speed.
pub fn schedule_round(cfg: &ProtocolConfig, t0: f64) -> Result<Timetable, ProtocolError> {
    cfg.validate()?;
    let g = &cfg.geometry;
    let d0 = g.dist_v0();
    let d1 = g.dist_v1();
    let delay = match cfg.mode {
        Mode::Commit => cfg.delay,
        Mode::Plain => 0.0,
    };

    let x_send = t0;
    let classical_arrival = t0 + d0;
    let y_send = classical_arrival - d1;
    let q_arrival = classical_arrival - delay;
    let q_send = q_arrival - d0 / g.quantum_speed_fraction;

    let commit_broadcast = q_arrival;
    let answer_broadcast = classical_arrival;
    Ok(Timetable {
        q_send,
        q_arrival,
        x_send,
        y_send,
        classical_arrival,
        commit_broadcast,
        commit_v0: commit_broadcast + d0,
        commit_v1: commit_broadcast + d1,
        answer_broadcast,
        answer_v0: answer_broadcast + d0,
        answer_v1: answer_broadcast + d1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Geometry;
    use approx::assert_abs_diff_eq;

    fn config(mode: Mode, delay: f64, quantum_speed_fraction: f64) -> ProtocolConfig {
        ProtocolConfig {
            n: 4,
            m: 2,
            f_seed: 0,
            delay,
            geometry: Geometry {
                quantum_speed_fraction,
                ..Geometry::symmetric()
            },
            mode,
        }
    }

    #[test]
    fn symmetric_plain_round() {
        let tt = schedule_round(&config(Mode::Plain, 0.0, 1.0), 0.0).unwrap();
        assert_abs_diff_eq!(tt.x_send, 0.0);
        assert_abs_diff_eq!(tt.q_send, 0.0);
        assert_abs_diff_eq!(tt.q_arrival, 1.0);
        assert_abs_diff_eq!(tt.classical_arrival, 1.0);
        assert_abs_diff_eq!(tt.answer_v0, 2.0);
        assert_abs_diff_eq!(tt.answer_v1, 2.0);
    }

    #[test]
    fn slow_quantum_signal_departs_early() {
        // At half light speed the qubit needs a one-unit head start.
        let tt = schedule_round(&config(Mode::Plain, 0.0, 0.5), 0.0).unwrap();
        assert_abs_diff_eq!(tt.q_send, -1.0);
        assert_abs_diff_eq!(tt.q_arrival, 1.0);
    }

    #[test]
    fn commit_mode_shifts_classical_by_delta() {
        let tt = schedule_round(&config(Mode::Commit, 0.1, 1.0), 0.0).unwrap();
        assert_abs_diff_eq!(tt.q_arrival + 0.1, tt.classical_arrival, epsilon = 1e-12);
        // Commit expected at V0 one light-unit after quantum arrival, the
        // answer δ later than that.
        assert_abs_diff_eq!(tt.commit_v0, tt.q_arrival + 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tt.answer_v0, tt.q_arrival + 0.1 + 1.0, epsilon = 1e-12);
    }

    #[test]
    fn causal_ordering_holds() {
        let tt = schedule_round(&config(Mode::Commit, 0.25, 0.7), 3.0).unwrap();
        assert!(tt.q_send <= tt.q_arrival);
        assert!(tt.q_arrival <= tt.classical_arrival);
        assert!(tt.commit_broadcast <= tt.commit_v0);
        assert!(tt.answer_broadcast <= tt.answer_v0);
        assert!(tt.commit_v0 <= tt.answer_v0);
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest adder width the depth formulas accept is `MIN_N + 1`.
pub const MIN_N: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthProfile {
    pub total: u64,
    pub x_steps: u64,
    pub cnot_steps: u64,
    pub toffoli_steps: u64,
    /// Entanglement-swapping steps; fractional, non-zero only for the QLA bus.
    pub comm_steps: f64,
}

impl DepthProfile {
    /// Communication steps rounded up for reporting.
    pub fn comm_steps_reported(&self) -> u64 {
        self.comm_steps.ceil() as u64
    }
}

fn flog2(x: u64) -> u64 {
    debug_assert!(x >= 1);
    u64::from(63 - x.leading_zeros())
}

fn check(n: u64) -> Result<()> {
    if n <= MIN_N {
        return Err(Error::NTooSmall { n, min: MIN_N });
    }
    Ok(())
}

/// The four floor-logs of n, n−1, n/3 and (n−1)/3.
///
/// `⌊log₂(x/3)⌋ = ⌊log₂⌊x/3⌋⌋` because powers of two are integers.
fn floor_logs(n: u64) -> [u64; 4] {
    [flog2(n), flog2(n - 1), flog2(n / 3), flog2((n - 1) / 3)]
}

/// Depth of the in-place carry-lookahead adder.
pub fn qcla_depth(n: u64) -> Result<DepthProfile> {
    check(n)?;
    let total = floor_logs(n).iter().sum::<u64>() + 14;
    Ok(DepthProfile {
        total,
        x_steps: 2,
        cnot_steps: 4,
        toffoli_steps: total - 6,
        comm_steps: 0.0,
    })
}

/// Entanglement distribution steps on the QLA bus: Σ ⌊log₂x⌋(⌊log₂x⌋+17)/4.
pub fn qla_comm_steps(n: u64) -> Result<f64> {
    check(n)?;
    let quarter_steps: u64 = floor_logs(n).iter().map(|&l| l * (l + 17)).sum();
    Ok(quarter_steps as f64 / 4.0)
}

/// QLA depth profile including the bus steps.
pub fn qla_depth(n: u64) -> Result<DepthProfile> {
    Ok(DepthProfile {
        comm_steps: qla_comm_steps(n)?,
        ..qcla_depth(n)?
    })
}

/// Ripple-carry adder on a nearest-neighbour chain: 2n+3 Toffoli-dominated
/// steps.
pub fn qrca_depth(n: u64) -> Result<DepthProfile> {
    if n == 0 {
        return Err(Error::NTooSmall { n, min: 0 });
    }
    let total = 2 * n + 3;
    Ok(DepthProfile {
        total,
        x_steps: 0,
        cnot_steps: 0,
        toffoli_steps: total,
        comm_steps: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeleportDistance {
    /// Distance in communication units.
    pub d: u64,
    /// Distance in ions, 7·d.
    pub l: u64,
    /// Nested swapping steps, ⌊log₂ L⌋.
    pub swap_steps: u64,
}

/// Bus distance spanned at QCLA stage `t`.
pub fn qla_teleport_distance(t: u32) -> Result<TeleportDistance> {
    if t == 0 || t > 120 {
        return Err(crate::error::invalid("t", "stage index must be in 1..=120"));
    }
    let d = if t % 2 == 0 {
        3 * (1u64 << (t / 2)) + 1
    } else {
        (1u64 << t.div_ceil(2)) + 1
    };
    let l = 7 * d;
    Ok(TeleportDistance {
        d,
        l,
        swap_steps: flog2(l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Floor of log2(num/den) by repeated doubling, no bit tricks.
    fn slow_flog2(num: u64, den: u64) -> i64 {
        let mut k = -1i64;
        let mut p = den as u128;
        while p <= num as u128 {
            p *= 2;
            k += 1;
        }
        k
    }

    fn brute_total(n: u64) -> i64 {
        slow_flog2(n, 1) + slow_flog2(n - 1, 1) + slow_flog2(n, 3) + slow_flog2(n - 1, 3) + 14
    }

    fn brute_comm(n: u64) -> f64 {
        [(n, 1), (n - 1, 1), (n, 3), (n - 1, 3)]
            .iter()
            .map(|&(a, b)| {
                let l = slow_flog2(a, b) as f64;
                l * (l + 17.0) / 4.0
            })
            .sum()
    }

    #[test]
    fn examples() {
        let d = qcla_depth(128).unwrap();
        assert_eq!(d.total, 37);
        assert_eq!(d.toffoli_steps, 31);
        assert_eq!((d.x_steps, d.cnot_steps), (2, 4));
        assert_eq!(qcla_depth(1024).unwrap().total, 49);
        assert_eq!(qcla_depth(7).unwrap().total, 20);
        assert_eq!(qla_comm_steps(128).unwrap(), 131.5);
        assert_eq!(qla_depth(128).unwrap().comm_steps_reported(), 132);
        assert_eq!(qla_comm_steps(1024).unwrap(), 226.0);
        assert!(matches!(qcla_depth(6), Err(Error::NTooSmall { .. })));
        assert!(qla_comm_steps(4).is_err());
        assert_eq!(qrca_depth(128).unwrap().total, 259);
    }

    #[test]
    fn exhaustive_against_brute_force() {
        for n in 7..=4096u64 {
            assert_eq!(qcla_depth(n).unwrap().total as i64, brute_total(n), "n={n}");
            assert_eq!(qla_comm_steps(n).unwrap(), brute_comm(n), "n={n}");
        }
        for k in 3..=20u32 {
            for n in [(1u64 << k) - 1, 1 << k, (1 << k) + 1, 3 << (k - 2)] {
                if n > 6 {
                    assert_eq!(qcla_depth(n).unwrap().total as i64, brute_total(n));
                    assert_eq!(qla_comm_steps(n).unwrap(), brute_comm(n));
                }
            }
        }
    }

    #[test]
    fn teleport_distance() {
        assert_eq!(qla_teleport_distance(2).unwrap(), TeleportDistance { d: 7, l: 49, swap_steps: 5 });
        assert_eq!(qla_teleport_distance(3).unwrap(), TeleportDistance { d: 5, l: 35, swap_steps: 5 });
        // log₂L ≈ t/2 + 4 holds to within 1 before flooring; the floor adds
        // up to another half step for odd t.
        for t in 1..=14u32 {
            let r = qla_teleport_distance(t).unwrap();
            let approx = f64::from(t) / 2.0 + 4.0;
            assert!(((r.l as f64).log2() - approx).abs() <= 1.0, "t={t}");
            assert!((r.swap_steps as f64 - approx).abs() <= 1.5, "t={t}");
        }
        assert!(qla_teleport_distance(0).is_err());
    }

    proptest! {
        #[test]
        fn matches_brute_force_random(n in 7u64..(1 << 20)) {
            prop_assert_eq!(qcla_depth(n).unwrap().total as i64, brute_total(n));
            prop_assert_eq!(qla_comm_steps(n).unwrap(), brute_comm(n));
        }

        #[test]
        fn comm_steps_monotone(n in 7u64..(1 << 20)) {
            prop_assert!(qla_comm_steps(n + 1).unwrap() >= qla_comm_steps(n).unwrap());
        }
    }
}

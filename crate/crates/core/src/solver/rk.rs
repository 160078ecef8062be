use crate::error::{Error, Result};

/// One step of the three-stage Shu–Osher SSPRK3 method for `u' = L(t, u)`.
///
/// `rhs(t, u, out)` writes `L(t, u)` into `out`. Failures are wrapped with the
/// (1-based) stage index.
pub fn ssprk3_step<F>(u: &mut [f64], time: f64, dt: f64, mut rhs: F) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let n = u.len();
    let mut l = vec![0.0; n];
    let wrap = |stage: usize| {
        move |e: Error| Error::Stage {
            stage,
            source: Box::new(e),
        }
    };

    rhs(time, u, &mut l).map_err(wrap(1))?;
    let u1: Vec<f64> = u.iter().zip(&l).map(|(a, b)| a + dt * b).collect();

    rhs(time + dt, &u1, &mut l).map_err(wrap(2))?;
    let u2: Vec<f64> = u
        .iter()
        .zip(u1.iter().zip(&l))
        .map(|(a, (b, c))| 0.75 * a + 0.25 * (b + dt * c))
        .collect();

    rhs(time + 0.5 * dt, &u2, &mut l).map_err(wrap(3))?;
    for (a, (b, c)) in u.iter_mut().zip(u2.iter().zip(&l)) {
        *a = *a / 3.0 + 2.0 / 3.0 * (b + dt * c);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_operator_is_identity() {
        let mut u = vec![1.0, -2.0, 3.5];
        ssprk3_step(&mut u, 0.0, 0.1, |_, _, out| {
            out.fill(0.0);
            Ok(())
        })
        .unwrap();
        assert_eq!(u, vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn linear_ode_matches_exponential() {
        let lambda = 1.0;
        let mut u = vec![1.0];
        ssprk3_step(&mut u, 0.0, 0.1, |_, v, out| {
            out[0] = lambda * v[0];
            Ok(())
        })
        .unwrap();
        assert!((u[0] - (0.1f64).exp()).abs() < 5e-6);
    }

    #[test]
    fn stage_failures_carry_the_stage_index() {
        let mut calls = 0;
        let mut u = vec![1.0];
        let err = ssprk3_step(&mut u, 0.0, 0.1, |_, _, out| {
            calls += 1;
            out[0] = 0.0;
            if calls == 2 {
                Err(Error::invalid("boom"))
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Stage { stage: 2, .. }));
    }
}

//! Seeded random instances for tests, sweeps and the acceptance suite.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::dm::{DmCranModel, DmPolicy, Tensor};
use crate::gaussian_info::GaussianCranModel;

/// A pmf of length `n` with flat Dirichlet weights.
pub fn pmf<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// `rows` independent pmfs of length `n`, concatenated.
pub fn stochastic_rows<R: Rng + ?Sized>(rng: &mut R, rows: usize, n: usize) -> Vec<f64> {
    (0..rows).flat_map(|_| pmf(rng, n)).collect()
}

/// A model with `alphabet`-ary inputs and outputs and fronthaul uniform in
/// `[0, 1.5]`. With `independent` set the outputs are conditionally
/// independent given the inputs.
pub fn dm_model<R: Rng + ?Sized>(
    rng: &mut R,
    users: usize,
    relays: usize,
    alphabet: usize,
    independent: bool,
) -> DmCranModel {
    let xs = vec![alphabet; users];
    let ys = vec![alphabet; relays];
    let fronthaul: Vec<f64> = (0..relays).map(|_| 1.5 * rng.gen::<f64>()).collect();
    let inputs = alphabet.pow(users as u32);
    if independent {
        let factors: Vec<Tensor> = (0..relays)
            .map(|_| {
                let mut shape = xs.clone();
                shape.push(alphabet);
                Tensor::new(shape, stochastic_rows(rng, inputs, alphabet)).unwrap()
            })
            .collect();
        DmCranModel::conditionally_independent(xs, &factors, fronthaul).unwrap()
    } else {
        let outputs = alphabet.pow(relays as u32);
        let shape: Vec<usize> = xs.iter().chain(&ys).copied().collect();
        let ch = Tensor::new(shape, stochastic_rows(rng, inputs, outputs)).unwrap();
        DmCranModel::new(xs, ys, ch, fronthaul).unwrap()
    }
}

/// A random policy with `q_card` time-sharing symbols and `u_card`-ary
/// quantizer outputs.
pub fn dm_policy<R: Rng + ?Sized>(rng: &mut R, model: &DmCranModel, q_card: usize, u_card: usize) -> DmPolicy {
    let pq = pmf(rng, q_card);
    let px = model
        .x_alphabets()
        .iter()
        .map(|&n| Tensor::new(vec![q_card, n], stochastic_rows(rng, q_card, n)).unwrap())
        .collect();
    let pu = model
        .y_alphabets()
        .iter()
        .map(|&n| Tensor::new(vec![q_card, n, u_card], stochastic_rows(rng, q_card * n, u_card)).unwrap())
        .collect();
    DmPolicy::new(pq, px, pu).unwrap()
}

/// Model and policy with binary time sharing and `alphabet`-ary quantizers.
pub fn dm_instance<R: Rng + ?Sized>(
    rng: &mut R,
    users: usize,
    relays: usize,
    alphabet: usize,
    independent: bool,
) -> (DmCranModel, DmPolicy) {
    let model = dm_model(rng, users, relays, alphabet, independent);
    let policy = dm_policy(rng, &model, 2, alphabet);
    (model, policy)
}

/// A circularly-symmetric standard normal sample.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    let r = (-u1.ln()).sqrt();
    let t = std::f64::consts::TAU * u2;
    Complex64::new(r * t.cos(), r * t.sin())
}

/// `rows × cols` matrix of i.i.d. `CN(0, 1)` entries.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// A Gaussian CRAN with Rayleigh channels, white noise, unit-trace input
/// covariances scaled to `power` and fronthaul uniform in `[0.5, 4]`.
pub fn gaussian_model<R: Rng + ?Sized>(
    rng: &mut R,
    users: usize,
    tx_antennas: usize,
    relays: usize,
    rx_antennas: usize,
    power: f64,
) -> GaussianCranModel {
    let n_tot = users * tx_antennas;
    let m_tot = relays * rx_antennas;
    let h = complex_gaussian_matrix(rng, m_tot, n_tot);
    let noise = (0..relays).map(|_| DMatrix::<Complex64>::identity(rx_antennas, rx_antennas)).collect();
    let inputs = (0..users)
        .map(|_| DMatrix::<Complex64>::identity(tx_antennas, tx_antennas).scale(power / tx_antennas as f64))
        .collect();
    let fronthaul = (0..relays).map(|_| 0.5 + 3.5 * rng.gen::<f64>()).collect();
    GaussianCranModel::new(vec![tx_antennas; users], vec![rx_antennas; relays], h, noise, inputs, fronthaul)
        .expect("random model is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pmfs_are_normalised_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let p = pmf(&mut a, 7);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x > 0.0));
        assert_eq!(p, pmf(&mut b, 7));
    }

    #[test]
    fn complex_normal_has_unit_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20000;
        let v: f64 = (0..n).map(|_| complex_normal(&mut rng).norm_sqr()).sum::<f64>() / n as f64;
        assert!((v - 1.0).abs() < 0.05);
    }
}

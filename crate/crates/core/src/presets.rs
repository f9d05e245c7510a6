//! Named models used throughout the tests, benches and CLI.

use crate::model::{
    make_power_like, make_special_family, BandModel, PowerLikeParams, SpecialFamilyKind,
    SpecialFamilyParams,
};

/// `d(n) = n^2`, `a_1(n) = n^(1/2)`.
pub fn m1_params() -> PowerLikeParams {
    PowerLikeParams::new(1.0, 2.0, 0.0, vec![(1.0, 0.5)])
}

/// `d(n) = n`, `a_1(n) = n^(1/4)`.
pub fn m2_params() -> PowerLikeParams {
    PowerLikeParams::new(1.0, 1.0, 0.0, vec![(1.0, 0.25)])
}

/// `m = 2`, `d(n) = n^(3/2)`, `a_1(n) = a_2(n) = n^(1/2) / 2`.
pub fn m3_params() -> PowerLikeParams {
    PowerLikeParams::new(1.0, 1.5, 0.0, vec![(0.5, 0.5), (0.5, 0.5)])
}

pub fn m1() -> BandModel {
    make_power_like(&m1_params()).expect("valid").with_label("M1")
}

pub fn m2() -> BandModel {
    make_power_like(&m2_params()).expect("valid").with_label("M2")
}

pub fn m3() -> BandModel {
    make_power_like(&m3_params()).expect("valid").with_label("M3")
}

/// `omega(x) = exp(x^(1/2))`, `kappa = 1/2`.
pub fn stretched_params() -> SpecialFamilyParams {
    SpecialFamilyParams {
        kind: SpecialFamilyKind::StretchedExp,
        c0: 1.0,
        delta0: 0.0,
        delta0_prime: 0.0,
        c: 1.0,
        kappa: 0.5,
        kappa_prime: 0.0,
        theta: 0.5,
        epsilon0: 0.5,
    }
}

/// Stretched-exponential model with `a_1(n) = 0.01 n^(-1/2) omega(n)`.
pub fn stretched() -> BandModel {
    let p = stretched_params();
    make_special_family(&p, vec![p.scaled_off_diagonal(0.01)])
        .expect("valid")
        .with_label("stretched")
}

/// Looks up a preset by name.
pub fn by_name(name: &str) -> Option<BandModel> {
    match name {
        "M1" | "m1" => Some(m1()),
        "M2" | "m2" => Some(m2()),
        "M3" | "m3" => Some(m3()),
        "stretched" => Some(stretched()),
        _ => None,
    }
}

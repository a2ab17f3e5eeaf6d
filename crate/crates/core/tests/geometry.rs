mod common;

use common::{dot, gaussian_unit, random_rotation, rng};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rotsym::geometry::{
    decompose, reconstruct, spherical_mean, tangent_frame, DirectionalSample, TangentFrame, UnitVector,
};
use rotsym::symmetry::{q_loc, q_loc_vmf, q_sc, q_sc_unspecified};
use rotsym::geometry::Estimator;

fn unit(p: usize) -> impl Strategy<Value = UnitVector> {
    prop::collection::vec(-1.0f64..1.0, p)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| UnitVector::normalize(v).unwrap())
}

fn dim_and_pair() -> impl Strategy<Value = (UnitVector, UnitVector)> {
    (3usize..9).prop_flat_map(|p| (unit(p), unit(p)))
}

proptest! {
    #[test]
    fn frame_is_orthonormal_complement(theta in (3usize..12).prop_flat_map(unit)) {
        let f = tangent_frame(&theta);
        let g = f.gamma();
        let p = theta.dim();
        let gtg = g.transpose() * g;
        prop_assert!((gtg - DMatrix::identity(p - 1, p - 1)).amax() < 1e-12);
        let gt = g.transpose() * theta.as_dvector();
        prop_assert!(gt.amax() < 1e-12);
        // the slow path agrees with the Householder fast path
        let slow = TangentFrame::from_parts(theta.clone(), g.clone()).unwrap();
        let x = theta.as_slice().iter().rev().copied().collect::<Vec<_>>();
        prop_assert!((slow.project(&x) - f.project(&x)).amax() < 1e-12);
    }

    #[test]
    fn decompose_round_trip((theta, x) in dim_and_pair()) {
        prop_assume!(theta.dot(x.as_slice()).abs() < 1.0 - 1e-6);
        let f = tangent_frame(&theta);
        let sc = decompose(x.as_slice(), &f).unwrap();
        prop_assert!((sc.v - theta.dot(x.as_slice())).abs() < 1e-14);
        prop_assert!((sc.u.norm() - 1.0).abs() < 1e-12);
        let back = reconstruct(&sc, &f);
        let err = back.as_dvector() - x.as_dvector();
        prop_assert!(err.amax() < 1e-12);
    }

    #[test]
    fn sign_inner_products_are_frame_free((theta, x) in dim_and_pair(), y_seed in 0u64..1000) {
        let y = gaussian_unit(theta.dim(), &mut rng(y_seed));
        prop_assume!(theta.dot(x.as_slice()).abs() < 1.0 - 1e-6);
        prop_assume!(theta.dot(y.as_slice()).abs() < 1.0 - 1e-6);
        let f = tangent_frame(&theta);
        let ux = decompose(x.as_slice(), &f).unwrap().u;
        let uy = decompose(y.as_slice(), &f).unwrap().u;
        let oracle = dot(
            &common::ambient_sign(x.as_slice(), theta.as_slice()),
            &common::ambient_sign(y.as_slice(), theta.as_slice()),
        );
        prop_assert!((ux.dot(&uy) - oracle).abs() < 1e-12);
    }

    #[test]
    fn statistics_are_rotation_invariant(seed in 0u64..500, p in 3usize..7, n in 5usize..60) {
        let mut r = rng(seed);
        let theta = gaussian_unit(p, &mut r);
        let sample = common::uniform_sample(p, n, &mut r);
        let o = random_rotation(p, &mut r);
        let rotated = sample.transform(&o);
        let otheta = UnitVector::normalize((&o * theta.as_dvector()).as_slice().to_vec()).unwrap();
        let a = q_loc(&sample, &theta).unwrap().statistic;
        let b = q_loc(&rotated, &otheta).unwrap().statistic;
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a));
        let a = q_sc(&sample, &theta).unwrap().statistic;
        let b = q_sc(&rotated, &otheta).unwrap().statistic;
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a));
        prop_assume!(n > p);
        let e = Estimator::SphericalMean;
        let a = q_sc_unspecified(&sample, &e).unwrap().statistic;
        let b = q_sc_unspecified(&rotated, &e).unwrap().statistic;
        prop_assert!((a - b).abs() < 1e-8 * (1.0 + a));
        let a = q_loc_vmf(&sample, &e).unwrap().statistic;
        let b = q_loc_vmf(&rotated, &e).unwrap().statistic;
        prop_assert!((a - b).abs() < 1e-8 * (1.0 + a));
    }

    #[test]
    fn spherical_mean_is_equivariant(seed in 0u64..500, p in 3usize..7) {
        let mut r = rng(seed);
        let sample = common::uniform_sample(p, 30, &mut r);
        let o = random_rotation(p, &mut r);
        let m = spherical_mean(&sample).unwrap();
        let om = spherical_mean(&sample.transform(&o)).unwrap();
        let expect: DVector<f64> = &o * m.as_dvector();
        prop_assert!((om.as_dvector() - expect).amax() < 1e-10);
    }
}

#[test]
fn basis_frame_matches_coordinate_axes() {
    let f = tangent_frame(&UnitVector::basis(3, 0).unwrap());
    let g = f.gamma();
    let expected = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
    assert_eq!(g, &expected);
}

#[test]
fn sign_of_axis_point_is_rejected() {
    let theta = UnitVector::basis(4, 1).unwrap();
    let f = tangent_frame(&theta);
    assert!(decompose(theta.as_slice(), &f).is_err());
    assert!(decompose(theta.neg().as_slice(), &f).is_err());
}

#[test]
fn sample_rejects_off_sphere_rows() {
    assert!(DirectionalSample::from_flat(3, vec![1.0, 0.0, 0.0, 0.0, 0.5, 0.0]).is_err());
    assert!(DirectionalSample::from_flat(3, vec![1.0, 0.0]).is_err());
}

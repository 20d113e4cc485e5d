use mikado_core::torus::{ScalarField, TorusGrid, VectorField};
use mikado_forge::tfld::{self, FieldData, TfldError, MAGIC, VERSION};
use proptest::prelude::*;

fn sample_scalar() -> ScalarField {
    let g = TorusGrid::new(2, 8).unwrap();
    ScalarField::from_fn(g, |x| (x[0] * 3.0).sin() + x[1])
}

fn sample_vector() -> VectorField {
    let g = TorusGrid::new(3, 8).unwrap();
    VectorField::from_fn(g, |x, a| x[a] * (a as f64 + 1.0))
}

#[test]
fn header_layout_is_fixed() {
    let f = sample_scalar();
    let bytes = tfld::encode_scalar(&f);
    assert_eq!(&bytes[..4], MAGIC);
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    assert_eq!([word(4), word(8), word(12), word(16)], [VERSION, 2, 8, 0]);
    assert_eq!(bytes.len(), 20 + 8 * 64);
    // first value is the grid corner x = (-1/2, -1/2)
    let v0 = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    assert_eq!(v0, (-1.5f64).sin() - 0.5);
}

#[test]
fn vectors_are_component_major() {
    let b = sample_vector();
    let bytes = tfld::encode_vector(&b);
    let n = 512;
    assert_eq!(bytes.len(), 20 + 8 * 3 * n);
    for a in 0..3 {
        let at = 20 + 8 * a * n;
        let v = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        assert_eq!(v, -0.5 * (a as f64 + 1.0));
    }
}

#[test]
fn roundtrip_is_bit_exact() {
    for data in [FieldData::Scalar(sample_scalar()), FieldData::Vector(sample_vector())] {
        let back = tfld::decode(&tfld::encode(&data)).unwrap();
        assert_eq!(back, data);
    }
}

#[test]
fn file_roundtrip_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.bin");
    let data = FieldData::Vector(sample_vector());
    let hash = tfld::write(&path, &data).unwrap();
    assert_eq!(tfld::read(&path).unwrap(), data);
    assert_eq!(hash, tfld::content_hash(&std::fs::read(&path).unwrap()));
    assert_eq!(hash.len(), 64);
}

#[test]
fn hash_is_sha256() {
    assert_eq!(
        tfld::content_hash(b"abc"),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
}

#[test]
fn corrupt_input_is_rejected() {
    let good = tfld::encode_scalar(&sample_scalar());
    let mut bad = good.clone();
    bad[0] = b'X';
    assert!(matches!(tfld::decode(&bad), Err(TfldError::BadMagic)));
    let mut bad = good.clone();
    bad[4] = 2;
    assert!(matches!(tfld::decode(&bad), Err(TfldError::Version(2))));
    let mut bad = good.clone();
    bad[16] = 5;
    assert!(matches!(tfld::decode(&bad), Err(TfldError::Rank(5))));
    assert!(matches!(
        tfld::decode(&good[..good.len() - 1]),
        Err(TfldError::Length { .. })
    ));
    assert!(matches!(tfld::decode(&good[..7]), Err(TfldError::Length { .. })));
    let mut bad = good;
    bad[12] = 7;
    assert!(matches!(tfld::decode(&bad), Err(TfldError::Grid(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_values_roundtrip(values in prop::collection::vec(any::<f64>(), 64)) {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = ScalarField::from_values(g, values.clone()).unwrap();
        let bytes = tfld::encode_scalar(&f);
        match tfld::decode(&bytes).unwrap() {
            FieldData::Scalar(back) => {
                let same = back.values().iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits());
                prop_assert!(same);
            }
            FieldData::Vector(_) => prop_assert!(false),
        }
    }
}

use proptest::prelude::*;
use qgan_core::store::{
    decode_weights, encode_weights, histogram, read_weights, write_weights, HistogramSpec,
    StoreError,
};
use qgan_core::Tensor;

const GOLDEN: &[u8] = include_bytes!("fixtures/golden.qgw");

fn golden_tensors() -> Vec<Tensor> {
    vec![
        Tensor::new("g.0.w", vec![2, 3], vec![0.5, -1.0, 0.25, 2.0, -0.125, 3.0]).unwrap(),
        Tensor::new("d.0.b", vec![1], vec![-0.75]).unwrap(),
    ]
}

#[test]
fn golden_file_decodes() {
    assert_eq!(decode_weights(GOLDEN).unwrap(), golden_tensors());
}

#[test]
fn golden_file_reencodes_byte_for_byte() {
    let mut out = Vec::new();
    encode_weights(&mut out, &golden_tensors()).unwrap();
    assert_eq!(out, GOLDEN);
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.qgw");
    write_weights(&path, &golden_tensors()).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), GOLDEN);
    assert_eq!(read_weights(&path).unwrap(), golden_tensors());
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(read_weights(dir.path().join("nope.qgw")), Err(StoreError::Io(_))));
}

fn tensor() -> impl Strategy<Value = Tensor> {
    (prop::collection::vec(1usize..5, 1..4), "[a-z][a-z0-9._]{0,12}").prop_flat_map(|(shape, name)| {
        let n: usize = shape.iter().product();
        prop::collection::vec(-1e6f32..1e6, n)
            .prop_map(move |v| Tensor::new(name.clone(), shape.clone(), v.into_iter().map(f64::from).collect()).unwrap())
    })
}

fn archive() -> impl Strategy<Value = Vec<Tensor>> {
    prop::collection::vec(tensor(), 0..5).prop_map(|ts| {
        ts.into_iter().enumerate().map(|(i, t)| {
            let name = format!("{}{i}", t.name());
            t.rename(name)
        }).collect()
    })
}

proptest! {
    #[test]
    fn f32_exact_archives_round_trip(ts in archive()) {
        let mut bytes = Vec::new();
        encode_weights(&mut bytes, &ts).unwrap();
        prop_assert_eq!(decode_weights(&bytes).unwrap(), ts);
    }

    #[test]
    fn every_truncation_is_rejected(ts in archive(), cut in any::<prop::sample::Index>()) {
        let mut bytes = Vec::new();
        encode_weights(&mut bytes, &ts).unwrap();
        let cut = cut.index(bytes.len());
        prop_assert!(matches!(decode_weights(&bytes[..cut]), Err(StoreError::TruncatedFile | StoreError::BadMagic)));
    }

    #[test]
    fn histogram_counts_every_element(values in prop::collection::vec(-5.0f64..5.0, 1..300), bins in 2usize..100) {
        let t = Tensor::from_vec("w", values).unwrap();
        let h = histogram(&t, &HistogramSpec::with_bins(bins)).unwrap();
        prop_assert_eq!(h.len(), bins);
        prop_assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), t.len());
        prop_assert!(h.windows(2).all(|w| w[0].hi == w[1].lo));
    }
}

use std::path::Path;

use ldct::io::*;
use ldct::lambda::ParamMap;
use ldct::operators::{Image, Sinogram};
use proptest::prelude::*;

fn as_f32(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| *x as f32 as f64).collect()
}

#[test]
fn file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let img = Image::new(2, 3, vec![0.1, 0.2, 0.3, 1e-8, 5.0, 0.0]).unwrap();
    write_image(&img, dir.path().join("a.imgf")).unwrap();
    let back = read_image(dir.path().join("a.imgf")).unwrap();
    assert_eq!(back.data(), as_f32(img.data()).as_slice());

    let sino = Sinogram::new(3, 2, vec![-0.5, 0.25, 1.0, 2.0, 3.5, 1e3]).unwrap();
    write_sinogram(&sino, dir.path().join("s.sngm")).unwrap();
    assert_eq!(read_sinogram(dir.path().join("s.sngm")).unwrap().data(), as_f32(sino.data()).as_slice());

    let map = ParamMap::new(2, 2, 2, vec![0.5, 1.0, 1.5, 2.0, 0.0, 3.0, 4.0, 0.125]).unwrap();
    write_pmap(&map, dir.path().join("m.pmap")).unwrap();
    assert_eq!(read_pmap(dir.path().join("m.pmap")).unwrap(), map);
}

#[test]
fn golden_layout_of_small_map() {
    let map = ParamMap::new(2, 2, 1, vec![0.5, 1.0, 1.5, 2.0]).unwrap();
    let bytes = encode_pmap(&map).unwrap();
    let mut expected = b"PMAP0001".to_vec();
    for d in [2u32, 2, 1] {
        expected.extend_from_slice(&d.to_le_bytes());
    }
    for v in [0.5f32, 1.0, 1.5, 2.0] {
        expected.extend_from_slice(&v.to_le_bytes());
    }
    assert_eq!(bytes, expected);
    assert_eq!(bytes.len(), 36);
}

#[test]
fn magics_are_not_interchangeable() {
    let dir = tempfile::tempdir().unwrap();
    let img = Image::filled(2, 2, 0.5);
    let path = dir.path().join("x.imgf");
    write_image(&img, &path).unwrap();
    assert!(read_sinogram(&path).is_err());
    assert!(read_pmap(&path).is_err());
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[..8].copy_from_slice(b"XXXX0001");
    assert!(decode(&bytes, IMGF_MAGIC, Path::new("x")).is_err());
}

#[test]
fn missing_file_is_an_io_error() {
    let err = read_image("/nonexistent/dir/file.imgf").unwrap_err();
    assert!(matches!(err, ldct::Error::Io { .. }));
}

proptest! {
    #[test]
    fn encode_decode_identity(h in 1usize..6, w in 1usize..6, c in 1usize..3, seed in any::<u64>()) {
        let n = h * w * c;
        let values: Vec<f64> = (0..n).map(|i| ((seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 40) as f64) / 1e4).collect();
        let bytes = encode(PMAP_MAGIC, [h, w, c], values.iter().copied()).unwrap();
        prop_assert_eq!(bytes.len(), 20 + 4 * n);
        let raw = decode(&bytes, PMAP_MAGIC, Path::new("mem")).unwrap();
        prop_assert_eq!(raw.dims, [h, w, c]);
        let back: Vec<f64> = raw.values.iter().map(|v| *v as f64).collect();
        prop_assert_eq!(back, as_f32(&values));
    }

    #[test]
    fn truncated_or_padded_payloads_fail(h in 1usize..5, w in 1usize..5, cut in 1usize..4) {
        let bytes = encode(IMGF_MAGIC, [h, w, 1], vec![1.0; h * w]).unwrap();
        prop_assert!(decode(&bytes[..bytes.len() - cut], IMGF_MAGIC, Path::new("mem")).is_err());
        let mut padded = bytes.clone();
        padded.extend(std::iter::repeat_n(0u8, cut));
        prop_assert!(decode(&padded, IMGF_MAGIC, Path::new("mem")).is_err());
    }

    #[test]
    fn nonnegative_maps_survive_round_trip(vals in proptest::collection::vec(0.0f64..1e6, 12)) {
        let map = ParamMap::new(2, 3, 2, vals).unwrap();
        let back = decode_pmap(&encode_pmap(&map).unwrap(), Path::new("mem")).unwrap();
        prop_assert_eq!(back.shape(), map.shape());
        let expected = as_f32(map.data());
        prop_assert_eq!(back.data(), expected.as_slice());
    }
}

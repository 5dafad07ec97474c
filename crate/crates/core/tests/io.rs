use pelab::io::{decode, encode, read_hfield, read_sfield, to_csv, write_field};
use pelab::synth::{make_weierstrass, SyntheticSpec};
use pelab::{Error, Grid3, SField};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn containers_round_trip_bit_for_bit(nx in 5usize..12, ny in 5usize..12, nz in 9usize..16, seed in any::<u64>()) {
        let g = Grid3::channel(2 * nx, 2 * ny, nz).unwrap();
        let u = make_weierstrass(&SyntheticSpec::new(0.7, 0.6, 2).seed(seed), &g).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.fld");
        write_field(&path, &u).unwrap();
        prop_assert_eq!(read_hfield(&path).unwrap(), u.clone());
        prop_assert!(matches!(read_sfield(&path), Err(Error::Format(_))));
        let (grid, comps) = decode(&encode(&u)).unwrap();
        prop_assert_eq!(grid, g);
        prop_assert_eq!(comps.len(), 2);
    }
}

#[test]
fn header_is_fixed_width() {
    let g = Grid3::channel(4, 4, 2).unwrap();
    let bytes = encode(&SField::zeros(&g));
    assert_eq!(&bytes[..6], b"PELAB1");
    assert_eq!(bytes.len(), 6 + 16 + 8 * g.n_nodes());
}

#[test]
fn damaged_containers_are_rejected() {
    let g = Grid3::channel(4, 4, 2).unwrap();
    let mut bytes = encode(&SField::constant(&g, 1.5));
    assert!(decode(&bytes[..10]).is_err());
    assert!(decode(&bytes[..bytes.len() - 3]).is_err());
    bytes[0] = b'X';
    assert!(matches!(decode(&bytes), Err(Error::Format(_))));
    assert!(matches!(
        read_sfield(std::path::Path::new("/nonexistent/f.fld")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn csv_has_one_row_per_node() {
    let g = Grid3::channel(4, 4, 3).unwrap();
    let s = to_csv(&SField::constant(&g, 2.0));
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("x,y,z,value"));
    assert_eq!(lines.count(), g.n_nodes());
}

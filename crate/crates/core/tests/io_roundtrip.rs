use bandfmm::geometry::{generate_quasiuniform, Domain};
use bandfmm::io::{parse_range, read_points, read_table, read_values, write_points, write_values, CsvSink};
use proptest::prelude::*;

#[test]
fn points_survive_a_round_trip() {
    let ps = generate_quasiuniform(50, Domain::unit(2), 3, 0.5).unwrap();
    let mut buf = Vec::new();
    write_points(&mut buf, &ps, &[("seed", "3".into())]).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with('#'));
    let back = read_points(&buf[..]).unwrap();
    assert_eq!(back.coords(), ps.coords());
}

#[test]
fn values_and_tables_round_trip() {
    let v = vec![1.0, -2.5e-300, 3.0e17, 0.1];
    let mut buf = Vec::new();
    write_values(&mut buf, "lambda", &v, &[]).unwrap();
    assert_eq!(read_values(&buf[..]).unwrap(), v);

    let mut sink = CsvSink::new(Vec::new(), &[("command", "tables".into())], &["k", "err"]).unwrap();
    sink.row(&["5", "0.25"]).unwrap();
    let t = read_table(&sink.finish().unwrap()[..]).unwrap();
    assert_eq!(t.header, vec!["k", "err"]);
    assert_eq!(t.f64_column("err").unwrap(), vec![0.25]);
}

#[test]
fn malformed_inputs_are_errors() {
    assert!(read_points(&b"x\n1.0\nfoo\n"[..]).is_err());
    assert!(read_values(&b"1.0\nnan-ish\n"[..]).is_err());
    assert!(parse_range("15..9").is_err());
    assert!(parse_range("").is_err());
}

proptest! {
    #[test]
    fn range_parser_accepts_its_own_output(a in 0usize..1000, len in 0usize..50) {
        let b = a + len;
        prop_assert_eq!(parse_range(&format!("{a}..{b}")).unwrap(), a..=b);
    }

    #[test]
    fn range_parser_never_panics(s in "\\PC{0,12}") {
        let _ = parse_range(&s);
    }
}

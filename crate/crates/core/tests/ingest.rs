mod common;

use splitlab::{parse_dataset, IngestOptions, CSV_HEADER};

#[test]
fn synthetic_corpus_round_trips_through_csv() {
    let ds = common::synthetic();
    let mut buf = Vec::new();
    ds.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    let back = parse_dataset(text.as_bytes(), IngestOptions::default()).unwrap();
    assert_eq!(back.rows(), ds.rows());
}

#[test]
fn errors_name_the_line() {
    let ds = common::synthetic();
    let mut buf = Vec::new();
    ds.write_csv(&mut buf).unwrap();
    let mut lines: Vec<String> = String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    lines[5] = lines[5].replacen("0.", "x0.", 1);
    let err = parse_dataset(lines.join("\n").as_bytes(), IngestOptions::default()).unwrap_err();
    assert!(err.to_string().contains("line 6"), "{err}");
}

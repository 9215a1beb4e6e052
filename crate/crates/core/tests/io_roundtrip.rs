use std::path::PathBuf;

use cannon_core::io::{parse_system, serialize_system, System};
use cannon_core::transforms::{deanchor, eliminate_terminals, gcsg_to_nca, nca_to_gcsg};

fn fixtures() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn round_trip(label: &str, sys: &System) {
    let text = serialize_system(sys);
    let again = parse_system(&text).unwrap_or_else(|e| panic!("{label}: {e}\n{text}"));
    assert_eq!(&again, sys, "{label}");
    assert_eq!(serialize_system(&again), text, "{label}");
}

#[test]
fn every_fixture_round_trips() {
    let all = fixtures();
    assert!(all.len() >= 10);
    for (name, text) in all {
        let sys = parse_system(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        round_trip(&name, &sys);
    }
}

#[test]
fn converted_fixtures_round_trip() {
    for (name, text) in fixtures() {
        match parse_system(&text).unwrap() {
            System::Nca(s) => round_trip(&format!("{name} as grammar"), &System::Grammar(nca_to_gcsg(&s).unwrap())),
            System::Grammar(g) => {
                let d = deanchor(&g).unwrap();
                round_trip(&format!("{name} deanchored"), &System::Grammar(d.clone()));
                round_trip(&format!("{name} without terminals"), &System::Grammar(eliminate_terminals(&g).unwrap()));
                round_trip(&format!("{name} as system"), &System::Nca(gcsg_to_nca(&d).unwrap()));
            }
        }
    }
}

#[test]
fn comments_and_spacing_are_ignored() {
    let plain = "kind: nca\nterminals: a A\nalphabet: a A\nrules:\na A -> _\n";
    let noisy = "# header\n\n  kind:   nca  # trailing\nterminals:A   a\n\talphabet: A a\nrules:   \n\n   a   A ->   _   # cancel\n";
    assert_eq!(parse_system(plain).unwrap(), parse_system(noisy).unwrap());
}

use commonfix::scenarios::{builtin, builtin_names, load, Provenance};

#[test]
fn builtin_expectations_hold() {
    let mut failures = Vec::new();
    for name in builtin_names() {
        let s = builtin(name).unwrap();
        for o in s.check_expectations(2).unwrap() {
            if !o.passed {
                failures.push(format!("{name}: {} ({:?}) observed {}", o.check, o.provenance, o.observed));
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn literature_expectations_are_tagged() {
    let s = builtin("example_1_8").unwrap();
    assert!(s.expectations.iter().any(|e| e.provenance == Provenance::Literature));
    assert!(s.expectations.iter().any(|e| e.provenance == Provenance::Derived));
}

#[test]
fn saved_file_loads_back_equal() {
    let dir = tempfile::tempdir().unwrap();
    for name in builtin_names() {
        let s = builtin(name).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        s.save(&path).unwrap();
        assert_eq!(load(&path).unwrap(), s, "{name}");
    }
}

//! Replays the checked-in fuzz corpus through the same entry points the fuzz
//! targets exercise, so stable builds catch regressions on those inputs.

use std::path::PathBuf;

use kg_cli::values::{parse_lengths, parse_modes, parse_sizes, parse_worker_list, MAX_WORKER_LIST};
use kg_core::benchmark::{parse_node_layout, rank, read_records, ModelFit};
use kg_core::checkpoint::{decode, encode_checkpoint};

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

#[test]
fn machines_csv() {
    let mut parsed = 0;
    for (name, data) in corpus("machines_csv") {
        if let Ok(records) = read_records(data.as_slice()) {
            parsed += 1;
            assert!(records.iter().all(|r| r.cores >= 1 && r.time_seconds > 0.0), "{name}");
            if !records.is_empty() {
                rank(&records).unwrap();
            }
        }
    }
    assert!(parsed >= 3);
}

#[test]
fn checkpoint_decode() {
    let mut parsed = 0;
    for (name, data) in corpus("checkpoint_decode") {
        if let Ok(c) = decode(&data) {
            parsed += 1;
            assert_eq!(encode_checkpoint(&c), data, "{name}");
        }
    }
    assert_eq!(parsed, 2);
}

#[test]
fn config_file() {
    for (name, data) in corpus("config_file") {
        let text = String::from_utf8(data).unwrap();
        let r = kg_cli::parse_config(&text);
        assert_eq!(r.is_ok(), !name.starts_with("bad"), "{name}");
    }
}

#[test]
fn worker_list() {
    for (_, data) in corpus("worker_list") {
        if let Ok(list) = parse_worker_list(std::str::from_utf8(&data).unwrap()) {
            assert!(!list.is_empty() && list.len() <= MAX_WORKER_LIST);
            assert!(list[0] >= 1 && list.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

#[test]
fn grid_values() {
    for (_, data) in corpus("grid_values") {
        let s = std::str::from_utf8(&data).unwrap();
        if let Ok(l) = parse_lengths(s) {
            assert!(l.iter().all(|v| v.is_finite() && *v > 0.0));
        }
        if let Ok(n) = parse_sizes(s) {
            assert!(n.iter().all(|v| *v >= 4 && v % 2 == 0));
        }
        let _ = parse_modes(s);
    }
}

#[test]
fn node_type() {
    for (_, data) in corpus("node_type") {
        if let Some((sockets, cores)) = parse_node_layout(std::str::from_utf8(&data).unwrap()) {
            assert!(sockets >= 1 && cores >= 1);
        }
    }
}

#[test]
fn model_fit_json() {
    let mut parsed = 0;
    for (_, data) in corpus("model_fit_json") {
        if let Ok(fit) = serde_json::from_slice::<ModelFit>(&data) {
            parsed += 1;
            assert!(fit.predict(1).is_finite());
        }
    }
    assert_eq!(parsed, 1);
}

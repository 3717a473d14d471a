#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

/// A 64-cell run that finishes in well under a second.
pub const SMALL: &str = r#"{
  "grid": {"dim": 1, "lengths": [1.0], "cells": [64]},
  "law1": {"k": 1.0, "gamma": 2.0, "khat": 1.0},
  "law2": {"k": 1.0, "gamma": 2.0, "khat": 1.0},
  "eps": 0.1,
  "eps_list": [0.1, 0.03, 0.01],
  "t_final": 0.02,
  "cfl": 0.5,
  "initial": {
    "rho": {"mean": 1.0, "terms": [[1, 0, 0.3]]},
    "n": {"mean": 1.0, "terms": [[1, 0, -0.2], [2, 0, 0.1]]}
  },
  "checkpoint_every": 0.005,
  "fields": "all"
}"#;

pub fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

/// Sorted relative paths of every file below `root`.
pub fn files(root: &Path) -> Vec<PathBuf> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}

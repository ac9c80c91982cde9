use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn reloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reloc")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Captures the fixture kitchen and a relocated copy with the fixture route.
fn pre_and_post(dir: &Path) -> (PathBuf, PathBuf) {
    let post_scene = dir.join("post_scene.json");
    let o = reloc(&["scene-gen", "--scene", s(&fixture("kitchen.json")), "--seed", "3", "--movable", "mug,apple", "--out", s(&post_scene)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (pre, post) = (dir.join("pre.jsonl"), dir.join("post.jsonl"));
    for (scene, out) in [(fixture("kitchen.json"), &pre), (post_scene, &post)] {
        let o = reloc(&["capture", "--scene", s(&scene), "--route", s(&fixture("route.json")), "--out", s(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    (pre, post)
}

#[test]
fn version_names_format() {
    let o = reloc(&["--version"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("format_version 1"));
}

#[test]
fn capture_then_track() {
    let dir = tempfile::tempdir().unwrap();
    let (pre, post) = pre_and_post(dir.path());

    let report = dir.path().join("report.json");
    let o = reloc(&["track", s(&pre), s(&post), "--out", s(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert!(json["summary"]["relocated"].as_u64().unwrap() > 0);

    let o = reloc(&["track", s(&pre), s(&post), "--format", "table"]);
    assert!(o.status.success());
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.lines().next().unwrap().contains("decision"));
    assert!(table.contains("relocated"));
}

#[test]
fn route_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (pre, _) = pre_and_post(dir.path());
    let text = fs::read_to_string(&pre).unwrap();
    let hash = text.split("\"route_hash\":\"").nth(1).unwrap().split('"').next().unwrap().to_string();
    let other = dir.path().join("other.jsonl");
    fs::write(&other, text.replace(&hash, "0000")).unwrap();
    let o = reloc(&["track", s(&pre), s(&other)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("route"), "{}", stderr(&o));
}

#[test]
fn missing_scene_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = reloc(&["scene-gen", "--scene", "no/such/scene.json", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no/such/scene.json"));
    assert!(!out.exists());
}

#[test]
fn unknown_instance_in_changeset() {
    let dir = tempfile::tempdir().unwrap();
    let changes = dir.path().join("changes.json");
    fs::write(&changes, r#"{"removals": ["unicorn_01"]}"#).unwrap();
    let out = dir.path().join("post.json");
    let o = reloc(&["scene-gen", "--scene", s(&fixture("kitchen.json")), "--changes", s(&changes), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unicorn_01"));
    assert!(!out.exists());
}

#[test]
fn colliding_route_reports_action_index() {
    let dir = tempfile::tempdir().unwrap();
    let route = dir.path().join("route.json");
    // Walking south from the start runs into the west counter's end at z < 1.
    fs::write(
        &route,
        r#"{"start_pose": {"position": [0.875, 1.125], "yaw": 0, "head_pitch": 0, "camera_height": 1.5},
            "grid_step": 0.25, "actions": ["RotateLeft", "MoveAhead", "MoveAhead", "MoveAhead", "MoveAhead", "MoveAhead"]}"#,
    )
    .unwrap();
    let out = dir.path().join("log.jsonl");
    let o = reloc(&["capture", "--scene", s(&fixture("kitchen.json")), "--route", s(&route), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("action"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing_dir").join("scene.json");
    let o = reloc(&["scene-gen", "--scene", s(&fixture("kitchen.json")), "--movable", "mug", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn bad_usage_exits_one() {
    assert_eq!(reloc(&["track"]).status.code(), Some(1));
    assert_eq!(reloc(&["capture", "--bogus"]).status.code(), Some(1));
    assert_eq!(reloc(&[]).status.code(), Some(1));
}

#[test]
fn eval_zero_scenes_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(fixture("experiment.json")).unwrap()).unwrap();
    cfg["n_random_scenes"] = 0.into();
    cfg["base_scene"] = s(&fixture("kitchen.json")).into();
    cfg["route"] = s(&fixture("route.json")).into();
    let path = dir.path().join("zero.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let o = reloc(&["eval", s(&path)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn eval_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(format!("{run}.json"));
        let artifacts = dir.path().join(format!("{run}_artifacts"));
        let o = reloc(&["eval", s(&fixture("experiment.json")), "--seed", "21", "--out", s(&out), "--artifacts", s(&artifacts)]);
        assert!(o.status.success(), "{}", stderr(&o));
        let summary = String::from_utf8_lossy(&o.stdout).into_owned();
        assert!(summary.contains("precision") && summary.contains("accuracy"));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&artifacts)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
            })
            .collect();
        files.sort();
        outputs.push((fs::read(&out).unwrap(), files, summary));
    }
    assert_eq!(outputs[0].1.len(), 31);
    assert!(outputs[0] == outputs[1]);
}

#[test]
fn scene_gen_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let gen = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = reloc(&["scene-gen", "--scene", s(&fixture("kitchen.json")), "--seed", seed, "--movable", "mug", "--out", s(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out).unwrap()
    };
    assert_eq!(gen("4", "a.json"), gen("4", "b.json"));
    assert_ne!(gen("4", "a.json"), gen("5", "c.json"));
}

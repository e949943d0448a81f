use std::path::PathBuf;

use minigame::map_file::load_map;
use minigame::scenario_file::load_scenario;
use minigame::minigame_core::engine::presets;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn scenario_files_match_the_presets() {
    for (file, preset) in [("doorway.toml", presets::doorway()), ("intersection.toml", presets::intersection())] {
        let loaded = load_scenario(&root().join("scenarios").join(file)).unwrap();
        assert_eq!(loaded, preset, "{file}");
    }
}

#[test]
fn map_files_match_the_presets() {
    for (file, preset) in [("doorway.map", presets::doorway()), ("intersection.map", presets::intersection())] {
        let m = load_map(&root().join("maps").join(file)).unwrap();
        assert_eq!(m.map, preset.map, "{file}");
        assert_eq!(m.zones, preset.zones, "{file}");
    }
}

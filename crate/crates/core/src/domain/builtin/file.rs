//! Files inside directories.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{by_index, entities, index_synonyms, pick, pick_distinct, single_entity};
use crate::domain::{
    ApplicationLogic, Domain, DomainException, GenerationRanges, InterfaceMethod, MethodCall,
    ObjectKind, ParameterSpec, RelationSpec,
};
use crate::knowledge::{Entity, State, Value};

pub struct FileLogic;

const DIR_NAMES: [&str; 6] = ["documents", "pictures", "music", "downloads", "projects", "backup"];
const FILE_NAMES: [&str; 10] = [
    "report", "notes", "photo", "song", "budget", "resume", "draft", "todo", "invoice", "slides",
];
const FILE_TYPES: [&str; 5] = ["pdf", "txt", "jpg", "mp3", "doc"];

pub fn domain() -> Domain {
    Domain::new(
        "file",
        &["Directory", "File"],
        vec![
            RelationSpec::new("name", &["Directory", "File"], ObjectKind::Text),
            RelationSpec::new("childFiles", &["Directory"], ObjectKind::Entity("File".into())),
            RelationSpec::new(
                "childDirectories",
                &["Directory"],
                ObjectKind::Entity("Directory".into()),
            ),
            RelationSpec::new("fileType", &["File"], ObjectKind::Text),
            RelationSpec::new("sizeInBytes", &["File"], ObjectKind::Int),
            RelationSpec::new("index", &["File"], ObjectKind::Int),
        ],
        vec![
            InterfaceMethod::new(
                "removeFiles",
                vec![ParameterSpec::EntityCollection("File".into())],
                &["remove", "delete", "erase"],
            ),
            InterfaceMethod::new(
                "moveFiles",
                vec![
                    ParameterSpec::EntityCollection("File".into()),
                    ParameterSpec::SingleEntity("Directory".into()),
                ],
                &["move", "transfer", "relocate"],
            ),
        ],
        GenerationRanges::new(&[("directories", 2, 3), ("files", 3, 7), ("size", 1, 999)]),
        Arc::new(FileLogic),
    )
    .expect("valid file domain")
    .with_synonyms("childFiles", &["in", "inside", "folder"])
    .with_synonyms("childDirectories", &["subfolder", "subdirectory", "folder"])
    .with_synonyms("fileType", &["extension", "format"])
    .with_synonyms("sizeInBytes", &["large", "big", "small", "kb"])
    .with_synonyms("index", &index_synonyms())
}

fn parent_of(state: &State, file: &Entity) -> Option<Entity> {
    state
        .query_subjects(&"childFiles".into(), &Value::Entity(file.clone()))
        .into_iter()
        .find_map(|v| v.as_entity().cloned())
}

fn children(state: &State, dir: &Entity) -> Vec<Entity> {
    let kids = state
        .query_objects(&Value::Entity(dir.clone()), &"childFiles".into())
        .into_iter()
        .filter_map(|v| v.as_entity().cloned());
    by_index(state, kids)
}

fn key(state: &State, file: &Entity) -> (Option<Value>, Option<Value>) {
    (
        state.object(file, "name").cloned(),
        state.object(file, "fileType").cloned(),
    )
}

impl ApplicationLogic for FileLogic {
    fn invoke(&self, state: &State, call: &MethodCall) -> Result<State, DomainException> {
        match &*call.method {
            "removeFiles" => {
                let victims = entities(call, 0);
                let parents: BTreeSet<Entity> =
                    victims.iter().filter_map(|f| parent_of(state, f)).collect();
                let mut b = state.to_builder();
                for v in &victims {
                    b.remove_entity(v);
                }
                for p in parents {
                    let rest: Vec<Entity> = children(state, &p)
                        .into_iter()
                        .filter(|f| !victims.contains(f))
                        .collect();
                    b.reindex(rest.iter());
                }
                Ok(b.build_unchecked())
            }
            "moveFiles" => {
                let target = single_entity(call, 1);
                let existing = children(state, &target);
                let moving: Vec<Entity> = by_index(
                    state,
                    entities(call, 0).into_iter().filter(|f| !existing.contains(f)),
                );
                if moving.is_empty() {
                    return Ok(state.clone());
                }
                let mut taken: BTreeSet<_> = existing.iter().map(|f| key(state, f)).collect();
                for f in &moving {
                    if !taken.insert(key(state, f)) {
                        return Err(DomainException::new(format!(
                            "a file with the name of {} already exists in the target directory",
                            f.id
                        )));
                    }
                }
                let parents: BTreeSet<Entity> =
                    moving.iter().filter_map(|f| parent_of(state, f)).collect();
                let mut b = state.to_builder();
                for f in &moving {
                    if let Some(p) = parent_of(state, f) {
                        b.remove_triple(&p, "childFiles", &Value::Entity(f.clone()));
                    }
                    b.add(&target, "childFiles", Value::Entity(f.clone()));
                }
                for p in parents {
                    let rest: Vec<Entity> = children(state, &p)
                        .into_iter()
                        .filter(|f| !moving.contains(f))
                        .collect();
                    b.reindex(rest.iter());
                }
                b.reindex(existing.iter().chain(moving.iter()));
                Ok(b.build_unchecked())
            }
            m => Err(DomainException::new(format!("unknown method {m}"))),
        }
    }

    fn initial_state(&self, ranges: &GenerationRanges, rng: &mut dyn RngCore) -> State {
        let mut b = State::builder("file");
        let n_dirs = ranges.sample_usize("directories", rng).max(1);
        let dirs: Vec<Entity> = pick_distinct(&DIR_NAMES, n_dirs, rng)
            .into_iter()
            .enumerate()
            .map(|(i, name)| {
                let d = b.entity(&format!("dir{}", i + 1), "Directory");
                b.add(&d, "name", Value::text(name));
                d
            })
            .collect();
        for d in &dirs[1..] {
            b.add(&dirs[0], "childDirectories", Value::Entity(d.clone()));
        }
        let n_files = ranges.sample_usize("files", rng);
        let mut used: BTreeSet<(usize, &str, &str)> = BTreeSet::new();
        let mut counts = vec![0i64; dirs.len()];
        let mut made = 0;
        while made < n_files {
            let di = rng.gen_range(0..dirs.len());
            let (name, ty) = (pick(&FILE_NAMES, rng), pick(&FILE_TYPES, rng));
            if !used.insert((di, name, ty)) {
                continue;
            }
            made += 1;
            counts[di] += 1;
            let f = b.entity(&format!("f{made}"), "File");
            b.add(&f, "name", Value::text(name));
            b.add(&f, "fileType", Value::text(ty));
            b.add(&f, "sizeInBytes", Value::Int(ranges.sample("size", rng)));
            b.add(&f, "index", Value::Int(counts[di]));
            b.add(&dirs[di], "childFiles", Value::Entity(f));
        }
        b.build_unchecked()
    }
}

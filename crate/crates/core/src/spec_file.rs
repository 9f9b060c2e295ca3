//! The on-disk model format: a versioned JSON document holding a variable
//! space, an optional cover, named relations, an optional presheaf carrier,
//! and run options. Columns are maps from variable name to state label, so
//! files never depend on variable order.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cohomology::Ring;
use crate::error::{Error, Result};
use crate::relations::Relation;
use crate::specifications::Subpresheaf;
use crate::state_traces::{StateSpace, System, Trace};
use crate::topology::{FiniteTopology, MaximalCover, OpenSet};

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecDoc {
    pub version: String,
    pub space: SpaceDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub specification: Option<SpecificationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub variables: Vec<VariableDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subbasis: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariableDoc {
    pub name: String,
    pub states: Vec<String>,
    /// Extra proset order pairs (state indices); the order is the
    /// reflexive-transitive closure. Absent means the total relation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<(u8, u8)>>,
}

pub type ColumnDoc = BTreeMap<String, String>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationDoc {
    pub name: String,
    pub domain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<Vec<ColumnDoc>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universal_bound: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecificationDoc {
    pub carrier: Vec<CarrierDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CarrierDoc {
    pub open: Vec<String>,
    pub traces: Vec<Vec<ColumnDoc>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct OptionsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

/// The fully validated in-memory model behind a document.
#[derive(Clone, Debug)]
pub struct Model {
    pub system: System,
    pub topology: FiniteTopology,
    pub cover: Option<MaximalCover>,
    pub relations: Vec<(String, Relation)>,
    pub specification: Option<Subpresheaf>,
    pub bound: usize,
    pub ring: Ring,
    pub fast_method: bool,
}

pub const DEFAULT_BOUND: usize = 3;

pub fn parse_ring(text: &str) -> Result<Ring> {
    match text {
        "Z" => Ok(Ring::Integers),
        "Q" => Ok(Ring::Rationals),
        other => {
            let q: u64 = other
                .strip_prefix('Z')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| {
                    Error::SpecFile(format!("options.ring: unknown ring {other:?}"))
                })?;
            if q < 2 || (2..q).take_while(|d| d * d <= q).any(|d| q % d == 0) {
                return Err(Error::SpecFile(format!(
                    "options.ring: modulus {q} is not prime"
                )));
            }
            Ok(Ring::ModPrime(q))
        }
    }
}

pub fn ring_name(ring: Ring) -> String {
    match ring {
        Ring::Integers => "Z".into(),
        Ring::Rationals => "Q".into(),
        Ring::ModPrime(q) => format!("Z{q}"),
    }
}

fn resolve_open(system: &System, names: &[String], at: &str) -> Result<OpenSet> {
    let mut open = OpenSet::EMPTY;
    for name in names {
        let var = system
            .var(name)
            .ok_or_else(|| Error::SpecFile(format!("{at}: unknown variable {name:?}")))?;
        open = open.union(OpenSet::singleton(var));
    }
    Ok(open)
}

fn resolve_trace(
    system: &System,
    domain: OpenSet,
    columns: &[ColumnDoc],
    at: &str,
) -> Result<Trace> {
    let mut raw = Vec::with_capacity(columns.len());
    for (c, col) in columns.iter().enumerate() {
        let mut values = Vec::with_capacity(domain.len());
        for var in domain.members() {
            let name = system.name(var);
            let label = col.get(name).ok_or_else(|| {
                Error::SpecFile(format!("{at}: column {c} misses variable {name:?}"))
            })?;
            let state = system.space(var).find(label).ok_or_else(|| {
                Error::SpecFile(format!(
                    "{at}: column {c} has unknown state {label:?} for variable {name:?}"
                ))
            })?;
            values.push(state);
        }
        if col.len() != domain.len() {
            return Err(Error::SpecFile(format!(
                "{at}: column {c} names a variable outside the domain"
            )));
        }
        raw.push(values);
    }
    Trace::new(system, domain, raw).map_err(|e| Error::SpecFile(format!("{at}: {e}")))
}

pub fn resolve(doc: &SpecDoc) -> Result<Model> {
    if doc.version != FORMAT_VERSION {
        return Err(Error::SpecFile(format!(
            "version: expected {FORMAT_VERSION:?}, got {:?}",
            doc.version
        )));
    }
    let mut vars = Vec::new();
    for (i, v) in doc.space.variables.iter().enumerate() {
        let at = format!("space.variables[{i}]");
        let space = match &v.order {
            Some(pairs) => StateSpace::with_order(v.states.clone(), pairs)
                .map_err(|e| Error::SpecFile(format!("{at}: {e}")))?,
            None => StateSpace::total(v.states.clone())
                .map_err(|e| Error::SpecFile(format!("{at}: {e}")))?,
        };
        vars.push((v.name.clone(), space));
    }
    let system = System::new(vars).map_err(|e| Error::SpecFile(format!("space: {e}")))?;
    let universe = system.universe();
    let topology = match &doc.space.subbasis {
        None => FiniteTopology::discrete(universe),
        Some(sets) => {
            let mut subbasis = Vec::new();
            for (i, names) in sets.iter().enumerate() {
                subbasis.push(resolve_open(&system, names, &format!("space.subbasis[{i}]"))?);
            }
            FiniteTopology::generate(universe, &subbasis)
                .map_err(|e| Error::SpecFile(format!("space.subbasis: {e}")))?
        }
    };
    let cover = match &doc.cover {
        None => None,
        Some(blocks) => {
            let mut set = BTreeSet::new();
            for (i, names) in blocks.iter().enumerate() {
                set.insert(resolve_open(&system, names, &format!("cover[{i}]"))?);
            }
            Some(
                MaximalCover::new(&topology, set)
                    .map_err(|e| Error::SpecFile(format!("cover: {e}")))?,
            )
        }
    };
    let options = doc.options.clone().unwrap_or_default();
    let bound = options.bound.unwrap_or(DEFAULT_BOUND);
    let ring = parse_ring(options.ring.as_deref().unwrap_or("Q"))?;
    let fast_method = match options.method.as_deref() {
        None | Some("direct") => false,
        Some("fast") => true,
        Some(other) => {
            return Err(Error::SpecFile(format!("options.method: unknown method {other:?}")))
        }
    };
    let mut relations = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, r) in doc.relations.iter().enumerate() {
        let at = format!("relations[{i}]");
        if !seen.insert(r.name.clone()) {
            return Err(Error::SpecFile(format!("{at}: duplicate name {:?}", r.name)));
        }
        let domain = resolve_open(&system, &r.domain, &format!("{at}.domain"))?;
        let relation = match (&r.traces, r.universal_bound) {
            (Some(_), Some(_)) => {
                return Err(Error::SpecFile(format!(
                    "{at}: traces and universal_bound are mutually exclusive"
                )))
            }
            (None, Some(b)) => Relation::neutral(domain, b),
            (rows, None) => {
                let mut traces = BTreeSet::new();
                for (t, columns) in rows.iter().flat_map(|v| v.iter()).enumerate() {
                    traces.insert(resolve_trace(
                        &system,
                        domain,
                        columns,
                        &format!("{at}.traces[{t}]"),
                    )?);
                }
                Relation::explicit(domain, traces).map_err(|e| {
                    Error::SpecFile(format!("{at}: {e}"))
                })?
            }
        };
        relations.push((r.name.clone(), relation));
    }
    let specification = match &doc.specification {
        None => None,
        Some(spec) => {
            let mut partial: BTreeMap<OpenSet, BTreeSet<Trace>> = BTreeMap::new();
            for (i, entry) in spec.carrier.iter().enumerate() {
                let at = format!("specification.carrier[{i}]");
                let open = resolve_open(&system, &entry.open, &format!("{at}.open"))?;
                let section = partial.entry(open).or_default();
                for (t, columns) in entry.traces.iter().enumerate() {
                    section.insert(resolve_trace(
                        &system,
                        open,
                        columns,
                        &format!("{at}.traces[{t}]"),
                    )?);
                }
            }
            Some(
                Subpresheaf::restriction_closure(&topology, partial)
                    .map_err(|e| Error::SpecFile(format!("specification: {e}")))?,
            )
        }
    };
    Ok(Model {
        system,
        topology,
        cover,
        relations,
        specification,
        bound,
        ring,
        fast_method,
    })
}

fn open_names(system: &System, open: OpenSet) -> Vec<String> {
    open.members().map(|v| system.name(v).to_string()).collect()
}

fn trace_doc(system: &System, t: &Trace) -> Vec<ColumnDoc> {
    t.columns()
        .iter()
        .map(|col| {
            t.domain()
                .members()
                .zip(col)
                .map(|(var, &s)| {
                    (
                        system.name(var).to_string(),
                        system.space(var).label(s).to_string(),
                    )
                })
                .collect()
        })
        .collect()
}

/// The canonical document for a model: traces sorted, options always
/// explicit, keys emitted in a fixed order.
pub fn to_doc(model: &Model) -> SpecDoc {
    let system = &model.system;
    let variables = (0..system.len())
        .map(|v| {
            let space = system.space(v);
            VariableDoc {
                name: system.name(v).to_string(),
                states: space.labels().to_vec(),
                order: if space.is_total() {
                    None
                } else {
                    Some(space.order_pairs())
                },
            }
        })
        .collect();
    let subbasis = Some(
        model
            .topology
            .opens()
            .iter()
            .map(|&o| open_names(system, o))
            .collect(),
    );
    let cover = model.cover.as_ref().map(|c| {
        c.blocks()
            .iter()
            .map(|&b| open_names(system, b))
            .collect()
    });
    let relations = model
        .relations
        .iter()
        .map(|(name, r)| {
            let (traces, universal_bound) = if r.is_universal() {
                (None, Some(r.bound().expect("universal has a bound")))
            } else {
                (
                    Some(
                        r.traces(system)
                            .iter()
                            .map(|t| trace_doc(system, t))
                            .collect(),
                    ),
                    None,
                )
            };
            RelationDoc { name: name.clone(), domain: open_names(system, r.label()), traces, universal_bound }
        })
        .collect();
    let specification = model.specification.as_ref().map(|a| SpecificationDoc {
        carrier: a
            .carrier()
            .iter()
            .map(|(&open, ts)| CarrierDoc {
                open: open_names(system, open),
                traces: ts.iter().map(|t| trace_doc(system, t)).collect(),
            })
            .collect(),
    });
    SpecDoc {
        version: FORMAT_VERSION.into(),
        space: SpaceDoc { variables, subbasis },
        cover,
        relations,
        specification,
        options: Some(OptionsDoc {
            bound: Some(model.bound),
            ring: Some(ring_name(model.ring)),
            method: Some(if model.fast_method { "fast".into() } else { "direct".into() }),
        }),
    }
}

pub fn loads(text: &str) -> Result<Model> {
    let doc: SpecDoc = serde_json::from_str(text)?;
    resolve(&doc)
}

pub fn load(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path)?;
    loads(&text).map_err(|e| Error::SpecFile(format!("{}: {e}", path.display())))
}

pub fn saves(model: &Model) -> String {
    let mut text = serde_json::to_string_pretty(&to_doc(model)).expect("serializable");
    text.push('\n');
    text
}

pub fn save(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, saves(model))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{dining_model, causal_loop_knowledgebase};

    fn dining_doc_model() -> Model {
        let m = dining_model(3).unwrap();
        let k = causal_loop_knowledgebase(&m).unwrap();
        Model {
            system: m.system,
            topology: m.topology,
            cover: Some(m.context),
            relations: k
                .valuations()
                .iter()
                .enumerate()
                .map(|(i, r)| (format!("phi{i}"), r.clone()))
                .collect(),
            specification: None,
            bound: DEFAULT_BOUND,
            ring: Ring::Rationals,
            fast_method: false,
        }
    }

    #[test]
    fn round_trip_is_canonical() {
        let model = dining_doc_model();
        let text = saves(&model);
        let reloaded = loads(&text).unwrap();
        assert_eq!(saves(&reloaded), text);
        assert_eq!(reloaded.relations.len(), 3);
        assert_eq!(reloaded.cover.unwrap().blocks().len(), 3);
    }

    #[test]
    fn degenerate_trace_names_the_column() {
        let model = dining_doc_model();
        let mut doc = to_doc(&model);
        let dup = doc.relations[0].traces.as_ref().unwrap()[0][0].clone();
        doc.relations[0]
            .traces
            .as_mut()
            .unwrap()[0]
            .insert(1, dup);
        let err = resolve(&doc).unwrap_err().to_string();
        assert!(err.contains("relations[0].traces[0]"), "got: {err}");
        assert!(err.contains("columns 0 and 1"), "got: {err}");
    }

    #[test]
    fn unknown_variable_is_located() {
        let model = dining_doc_model();
        let mut doc = to_doc(&model);
        doc.relations[1].domain.push("nosuch".into());
        let err = resolve(&doc).unwrap_err().to_string();
        assert!(err.contains("relations[1].domain"), "got: {err}");
        assert!(err.contains("nosuch"), "got: {err}");
    }

    #[test]
    fn empty_relations_section_is_valid() {
        let model = dining_doc_model();
        let mut doc = to_doc(&model);
        doc.relations.clear();
        assert!(resolve(&doc).unwrap().relations.is_empty());
    }

    #[test]
    fn ring_parsing() {
        assert_eq!(parse_ring("Z").unwrap(), Ring::Integers);
        assert_eq!(parse_ring("Q").unwrap(), Ring::Rationals);
        assert_eq!(parse_ring("Z7").unwrap(), Ring::ModPrime(7));
        assert!(parse_ring("Z6").is_err());
        assert!(parse_ring("R").is_err());
    }
}

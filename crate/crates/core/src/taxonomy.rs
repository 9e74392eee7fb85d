//! Technique taxonomy: assigned task → categories of analysis → analytical
//! approaches, plus the technique registry filtered against a problem
//! characterization.
//!
//! The registry is data. A default is embedded in the crate and any registry
//! file with the same layout can replace it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recommend::RuleTree;

pub const REGISTRY_FORMAT_VERSION: u32 = 1;

const DEFAULT_REGISTRY: &str = include_str!("../data/default_registry.json");

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemCharacterization {
    pub assigned_task: String,
    #[serde(default)]
    pub data_considerations: BTreeSet<String>,
    #[serde(default)]
    pub resource_considerations: BTreeSet<String>,
    #[serde(default)]
    pub experience_considerations: BTreeSet<String>,
}

impl ProblemCharacterization {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TechniqueDescriptor {
    pub id: String,
    pub display_name: String,
    pub approaches: BTreeSet<String>,
    pub categories: BTreeSet<String>,
    #[serde(default)]
    pub training_styles: BTreeSet<String>,
    #[serde(default)]
    pub required_data_tags: BTreeSet<String>,
    #[serde(default)]
    pub required_resource_tags: BTreeSet<String>,
}

/// Allowed consideration tags per factor.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Considerations {
    #[serde(default)]
    pub data: BTreeSet<String>,
    #[serde(default)]
    pub resources: BTreeSet<String>,
    #[serde(default)]
    pub experience: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingRegistry {
    pub version: u32,
    pub tasks: BTreeMap<String, BTreeSet<String>>,
    pub categories: BTreeMap<String, BTreeSet<String>>,
    pub approaches: BTreeSet<String>,
    #[serde(default)]
    pub considerations: Considerations,
    pub techniques: Vec<TechniqueDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_tree: Option<RuleTree>,
}

/// Candidates surviving the filter. An empty list carries a warning rather
/// than failing.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterOutcome {
    pub candidates: Vec<TechniqueDescriptor>,
    pub warning: Option<String>,
}

impl MappingRegistry {
    /// The registry shipped with the crate.
    pub fn builtin() -> MappingRegistry {
        MappingRegistry::from_json(DEFAULT_REGISTRY).expect("embedded registry is valid")
    }

    pub fn from_json(text: &str) -> Result<MappingRegistry> {
        let registry: MappingRegistry =
            serde_json::from_str(text).map_err(|e| Error::json("registry", e))?;
        registry.validate()?;
        Ok(registry)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<MappingRegistry> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MappingRegistry::from_json(&text)
    }

    /// `"default"` selects the built-in registry, anything else is a path.
    pub fn resolve(spec: &str, base: Option<&Path>) -> Result<MappingRegistry> {
        if spec == "default" {
            return Ok(MappingRegistry::builtin());
        }
        match base {
            Some(dir) => MappingRegistry::load(dir.join(spec)),
            None => MappingRegistry::load(spec),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("registry", e))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidRegistry(msg));
        if self.version != REGISTRY_FORMAT_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        for (task, cats) in &self.tasks {
            if cats.is_empty() {
                return bad(format!("task `{task}` maps to no category"));
            }
            if let Some(c) = cats.iter().find(|c| !self.categories.contains_key(*c)) {
                return bad(format!("task `{task}` references unknown category `{c}`"));
            }
        }
        for (cat, approaches) in &self.categories {
            if let Some(a) = approaches.iter().find(|a| !self.approaches.contains(*a)) {
                return bad(format!("category `{cat}` references unknown approach `{a}`"));
            }
        }
        let mut ids = BTreeSet::new();
        for t in &self.techniques {
            if !ids.insert(t.id.as_str()) {
                return bad(format!("duplicate technique `{}`", t.id));
            }
            if t.approaches.is_empty() || t.categories.is_empty() {
                return bad(format!("technique `{}` needs approaches and categories", t.id));
            }
            if let Some(a) = t.approaches.iter().find(|a| !self.approaches.contains(*a)) {
                return bad(format!("technique `{}` references unknown approach `{a}`", t.id));
            }
            if let Some(c) = t.categories.iter().find(|c| !self.categories.contains_key(*c)) {
                return bad(format!("technique `{}` references unknown category `{c}`", t.id));
            }
            if let Some(tag) = t.required_data_tags.difference(&self.considerations.data).next() {
                return bad(format!("technique `{}` requires unknown data tag `{tag}`", t.id));
            }
            if let Some(tag) = t
                .required_resource_tags
                .difference(&self.considerations.resources)
                .next()
            {
                return bad(format!("technique `{}` requires unknown resource tag `{tag}`", t.id));
            }
        }
        if let Some(tree) = &self.rule_tree {
            tree.validate()
                .map_err(|e| Error::InvalidRegistry(format!("rule tree: {e}")))?;
            if let Some(id) = tree.algorithms().iter().find(|id| !ids.contains(id.as_str())) {
                return bad(format!("rule tree references unknown technique `{id}`"));
            }
        }
        Ok(())
    }

    pub fn validate_characterization(&self, pc: &ProblemCharacterization) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidCharacterization(msg));
        if pc.assigned_task.trim().is_empty() {
            return bad("assigned task is empty".into());
        }
        for (factor, tags, allowed) in [
            ("data", &pc.data_considerations, &self.considerations.data),
            ("resource", &pc.resource_considerations, &self.considerations.resources),
            ("experience", &pc.experience_considerations, &self.considerations.experience),
        ] {
            if let Some(tag) = tags.difference(allowed).next() {
                return bad(format!("unknown {factor} consideration `{tag}`"));
            }
        }
        Ok(())
    }

    pub fn technique(&self, id: &str) -> Option<&TechniqueDescriptor> {
        self.techniques.iter().find(|t| t.id == id)
    }
}

pub fn map_task_to_categories(registry: &MappingRegistry, task: &str) -> Result<BTreeSet<String>> {
    registry
        .tasks
        .get(task)
        .cloned()
        .ok_or_else(|| Error::UnknownTask(task.to_string()))
}

pub fn map_categories_to_approaches(
    registry: &MappingRegistry,
    categories: &BTreeSet<String>,
) -> Result<BTreeSet<String>> {
    if categories.is_empty() {
        return Err(Error::InvalidParameter("no categories of analysis given".into()));
    }
    let mut approaches = BTreeSet::new();
    for cat in categories {
        let mapped = registry
            .categories
            .get(cat)
            .ok_or_else(|| Error::UnknownCategory(cat.clone()))?;
        approaches.extend(mapped.iter().cloned());
    }
    Ok(approaches)
}

/// Techniques whose approaches meet the task's approach set and whose data and
/// resource requirements are all present in the characterization, in
/// registry order.
pub fn filter_techniques(
    registry: &MappingRegistry,
    characterization: &ProblemCharacterization,
) -> Result<FilterOutcome> {
    registry.validate_characterization(characterization)?;
    let categories = map_task_to_categories(registry, &characterization.assigned_task)?;
    let approaches = map_categories_to_approaches(registry, &categories)?;

    let candidates: Vec<TechniqueDescriptor> = registry
        .techniques
        .iter()
        .filter(|t| !t.approaches.is_disjoint(&approaches))
        .filter(|t| t.required_data_tags.is_subset(&characterization.data_considerations))
        .filter(|t| {
            t.required_resource_tags
                .is_subset(&characterization.resource_considerations)
        })
        .cloned()
        .collect();

    let warning = candidates.is_empty().then(|| {
        format!(
            "no technique satisfies task `{}` with the given considerations",
            characterization.assigned_task
        )
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok(FilterOutcome {
        candidates,
        warning,
    })
}

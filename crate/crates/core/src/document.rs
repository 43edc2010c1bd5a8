//! The JSON input format and its normalization.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fincat::{validate_category, CategoryBuilder, CategoryReport, FinCategory, MorId, MorRef};
use crate::relcat::RelativeCategory;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Syntax(String),
    #[error("morphism name {name:?} is reserved for identities")]
    ReservedName { name: String },
    #[error("morphism {morphism:?} refers to unknown object {object:?}")]
    UnknownObject { morphism: String, object: String },
    #[error("unknown morphism {name:?} in {section}")]
    UnknownMorphism { name: String, section: &'static str },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDecl {
    pub name: String,
    pub dom: String,
    pub cod: String,
}

/// `equals = after ∘ then`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionDecl {
    pub after: String,
    pub then: String,
    pub equals: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
    pub objects: Vec<String>,
    #[serde(default)]
    pub morphisms: Vec<MorphismDecl>,
    #[serde(default)]
    pub composition: Vec<CompositionDecl>,
    #[serde(default)]
    pub hypercovers: Vec<String>,
}

impl CategoryDocument {
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        serde_json::from_str(text).map_err(|e| DocumentError::Syntax(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    /// The document of a relative category: every composite of non-identity
    /// morphisms listed, identities left implicit.
    pub fn from_relative(r: &RelativeCategory, metadata: Option<Metadata>) -> Self {
        let c = &r.base;
        let name = |f: MorId| c.morphism_name(f).to_string();
        let mut composition = Vec::new();
        for f in c.declared_morphisms() {
            for g in c.declared_morphisms() {
                if let Some(h) = c.compose(g, f) {
                    composition.push(CompositionDecl {
                        after: name(g),
                        then: name(f),
                        equals: name(h),
                    });
                }
            }
        }
        Self {
            metadata,
            objects: c.objects().iter().map(|s| s.to_string()).collect(),
            morphisms: c
                .declared_morphisms()
                .map(|f| MorphismDecl {
                    name: name(f),
                    dom: c.object_name(c.dom(f)).into(),
                    cod: c.object_name(c.cod(f)).into(),
                })
                .collect(),
            composition,
            hypercovers: r.hypercover_names(),
        }
    }

    pub fn name(&self) -> &str {
        self.metadata.as_ref().map_or("unnamed", |m| m.name.as_str())
    }
}

/// A parsed document: the category may still violate the axioms.
#[derive(Clone, Debug)]
pub struct LoadedDocument {
    pub document: CategoryDocument,
    pub category: FinCategory,
    pub hypercovers: Vec<MorId>,
    pub category_report: CategoryReport,
}

impl LoadedDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        Self::from_document(CategoryDocument::from_json(text)?)
    }

    pub fn from_document(document: CategoryDocument) -> Result<Self, DocumentError> {
        let mut b = CategoryBuilder::new();
        let mut objects = HashMap::new();
        for o in &document.objects {
            let id = b.object(o.clone());
            objects.entry(o.as_str()).or_insert(id);
        }
        let mut morphisms: HashMap<String, MorRef> = HashMap::new();
        for (o, &id) in &objects {
            morphisms.insert(format!("id_{o}"), b.identity(id));
        }
        for m in &document.morphisms {
            if m.name.starts_with("id_") {
                return Err(DocumentError::ReservedName { name: m.name.clone() });
            }
            let end = |o: &String| {
                objects.get(o.as_str()).copied().ok_or_else(|| DocumentError::UnknownObject {
                    morphism: m.name.clone(),
                    object: o.clone(),
                })
            };
            let r = b.morphism(m.name.clone(), end(&m.dom)?, end(&m.cod)?);
            morphisms.entry(m.name.clone()).or_insert(r);
        }
        let lookup = |n: &String, section: &'static str| {
            morphisms.get(n).copied().ok_or_else(|| DocumentError::UnknownMorphism {
                name: n.clone(),
                section,
            })
        };
        for row in &document.composition {
            let (g, f, h) = (lookup(&row.after, "composition")?, lookup(&row.then, "composition")?, lookup(&row.equals, "composition")?);
            b.composite(g, f, h);
        }
        let refs: Vec<MorRef> = document
            .hypercovers
            .iter()
            .map(|n| lookup(n, "hypercovers"))
            .collect::<Result<_, _>>()?;
        let category = b.build();
        let declared = category.declared_morphisms().len();
        let hypercovers = refs
            .into_iter()
            .map(|r| match r {
                MorRef::Declared(i) => i,
                MorRef::Identity(o) => declared + o,
            })
            .collect();
        let category_report = validate_category(&category);
        Ok(Self {
            document,
            category,
            hypercovers,
            category_report,
        })
    }

    /// `None` when the category axioms fail.
    pub fn relative(&self) -> Option<RelativeCategory> {
        self.category_report
            .is_valid()
            .then(|| RelativeCategory::new(self.category.clone(), &self.hypercovers))
    }

    pub fn name(&self) -> &str {
        self.document.name()
    }

    /// The normalized document when the category is valid, the input otherwise.
    pub fn normalized(&self) -> CategoryDocument {
        match self.relative() {
            Some(r) => CategoryDocument::from_relative(&r, self.document.metadata.clone()),
            None => self.document.clone(),
        }
    }

    /// SHA-256 of the compact normalized document.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(&self.normalized()).expect("documents serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture, FIXTURE_NAMES};

    #[test]
    fn fixtures_parse_and_validate() {
        for name in FIXTURE_NAMES {
            let doc = LoadedDocument::parse(fixture(name).unwrap()).unwrap();
            assert!(doc.category_report.is_valid(), "{name}");
            assert_eq!(doc.name(), name);
        }
    }

    #[test]
    fn normalization_is_idempotent() {
        for name in FIXTURE_NAMES {
            let once = LoadedDocument::parse(fixture(name).unwrap()).unwrap().normalized();
            let twice = LoadedDocument::from_document(once.clone()).unwrap().normalized();
            assert_eq!(once, twice);
            assert_eq!(once.to_json(), twice.to_json());
        }
    }

    #[test]
    fn reserved_names_are_rejected() {
        let text = r#"{"objects":["a"],"morphisms":[{"name":"id_a","dom":"a","cod":"a"}]}"#;
        assert_eq!(
            LoadedDocument::parse(text).unwrap_err(),
            DocumentError::ReservedName { name: "id_a".into() }
        );
    }

    #[test]
    fn identity_names_resolve() {
        let text = r#"{"objects":["a","b"],
            "morphisms":[{"name":"i","dom":"a","cod":"b"},{"name":"j","dom":"b","cod":"a"}],
            "composition":[{"after":"j","then":"i","equals":"id_a"},{"after":"i","then":"j","equals":"id_b"}],
            "hypercovers":["i","j","id_a"]}"#;
        let doc = LoadedDocument::parse(text).unwrap();
        assert!(doc.category_report.is_valid());
        assert_eq!(doc.normalized().hypercovers, vec!["i", "j"]);
    }

    #[test]
    fn unknown_references() {
        let text = r#"{"objects":["a"],"morphisms":[{"name":"f","dom":"a","cod":"z"}]}"#;
        assert!(matches!(LoadedDocument::parse(text), Err(DocumentError::UnknownObject { .. })));
        let text = r#"{"objects":["a"],"hypercovers":["f"]}"#;
        assert!(matches!(LoadedDocument::parse(text), Err(DocumentError::UnknownMorphism { .. })));
        assert!(matches!(LoadedDocument::parse("{"), Err(DocumentError::Syntax(_))));
        assert!(matches!(LoadedDocument::parse(r#"{"objects":[],"extra":1}"#), Err(DocumentError::Syntax(_))));
    }

    #[test]
    fn empty_category() {
        let doc = LoadedDocument::parse(r#"{"objects":[]}"#).unwrap();
        assert!(doc.category_report.is_valid());
        assert_eq!(doc.digest().len(), 64);
    }
}

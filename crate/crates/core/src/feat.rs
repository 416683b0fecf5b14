//! Flat feature structures and unification.
//!
//! A feature structure is a map from feature names to atomic values or
//! variables. Unification of two atoms fails iff they differ; variables are
//! resolved through a shared [`Bindings`] environment and may be co-indexed
//! across nodes of a tree instance. Everything here is non-destructive: a
//! failed unification leaves its inputs and the environment untouched.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

/// An atomic value or a co-indexable variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FeatureValue {
    Atom(String),
    Var(String),
}

impl FeatureValue {
    pub fn atom(s: &str) -> Self {
        FeatureValue::Atom(String::from(s))
    }

    pub fn var(s: &str) -> Self {
        FeatureValue::Var(String::from(s))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, FeatureValue::Var(_))
    }
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::Atom(a) => write!(f, "{a}"),
            FeatureValue::Var(v) => write!(f, "?{v}"),
        }
    }
}

/// Flat attribute-value map. Absence of a feature means "unconstrained".
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct FeatureStructure {
    feats: BTreeMap<String, FeatureValue>,
}

impl FeatureStructure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.feats.is_empty()
    }

    pub fn len(&self) -> usize {
        self.feats.len()
    }

    pub fn get(&self, name: &str) -> Option<&FeatureValue> {
        self.feats.get(name)
    }

    pub fn set(&mut self, name: &str, value: FeatureValue) {
        self.feats.insert(String::from(name), value);
    }

    pub fn with(mut self, name: &str, value: FeatureValue) -> Self {
        self.set(name, value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &FeatureValue)> {
        self.feats.iter()
    }

    /// Renames every variable `?X` to `?<prefix>X`. Used to keep the
    /// variables of independently instantiated trees apart.
    pub fn rename_vars(&self, prefix: &str) -> FeatureStructure {
        let mut out = FeatureStructure::new();
        for (k, v) in self.iter() {
            let v = match v {
                FeatureValue::Var(name) => {
                    let mut n = String::from(prefix);
                    n.push_str(name);
                    FeatureValue::Var(n)
                }
                atom => atom.clone(),
            };
            out.feats.insert(k.clone(), v);
        }
        out
    }

    /// Replaces bound variables by their bindings where possible.
    pub fn resolve(&self, env: &Bindings) -> FeatureStructure {
        let mut out = FeatureStructure::new();
        for (k, v) in self.iter() {
            out.feats.insert(k.clone(), env.resolve(v));
        }
        out
    }
}

impl fmt::Display for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (k, v)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        write!(f, "]")
    }
}

impl FromIterator<(String, FeatureValue)> for FeatureStructure {
    fn from_iter<T: IntoIterator<Item = (String, FeatureValue)>>(iter: T) -> Self {
        FeatureStructure {
            feats: iter.into_iter().collect(),
        }
    }
}

/// Variable bindings: a union-find style equivalence over variables, with
/// atoms as class representatives when known.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    map: BTreeMap<String, FeatureValue>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Follows variable links until an atom or an unbound variable.
    pub fn resolve(&self, value: &FeatureValue) -> FeatureValue {
        let mut current = value.clone();
        // Bindings never form cycles (see `bind`), so this terminates.
        loop {
            match &current {
                FeatureValue::Atom(_) => return current,
                FeatureValue::Var(name) => match self.map.get(name) {
                    Some(next) => current = next.clone(),
                    None => return current,
                },
            }
        }
    }

    fn bind(&mut self, var: &str, value: FeatureValue) {
        if let FeatureValue::Var(v) = &value {
            if v == var {
                return;
            }
        }
        self.map.insert(String::from(var), value);
    }

    /// Unifies two values under this environment, extending it on success.
    pub fn unify_values(
        &mut self,
        a: &FeatureValue,
        b: &FeatureValue,
    ) -> Result<FeatureValue, UnifyFailure> {
        let ra = self.resolve(a);
        let rb = self.resolve(b);
        match (&ra, &rb) {
            (FeatureValue::Atom(x), FeatureValue::Atom(y)) => {
                if x == y {
                    Ok(ra)
                } else {
                    Err(UnifyFailure {
                        feature: String::new(),
                        left: ra.clone(),
                        right: rb.clone(),
                    })
                }
            }
            (FeatureValue::Var(v), _) => {
                self.bind(v, rb.clone());
                Ok(rb)
            }
            (_, FeatureValue::Var(v)) => {
                self.bind(v, ra.clone());
                Ok(ra)
            }
        }
    }
}

/// A normal (non-exceptional) unification failure: two distinct atoms met.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnifyFailure {
    pub feature: String,
    pub left: FeatureValue,
    pub right: FeatureValue,
}

impl fmt::Display for UnifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "feature clash on `{}`: {} vs {}",
            self.feature, self.left, self.right
        )
    }
}

/// Unifies two flat feature structures under `env`.
///
/// On success the result carries every feature of both inputs, with shared
/// features unified, and `env` is extended with any new variable bindings.
/// On failure `env` is left exactly as it was.
pub fn unify(
    a: &FeatureStructure,
    b: &FeatureStructure,
    env: &Bindings,
) -> Result<(FeatureStructure, Bindings), UnifyFailure> {
    let mut env = env.clone();
    let mut out = a.clone();
    for (k, bv) in b.iter() {
        match out.get(k) {
            None => out.set(k, bv.clone()),
            Some(av) => {
                let merged = env.unify_values(&av.clone(), bv).map_err(|mut e| {
                    e.feature = k.clone();
                    e
                })?;
                out.set(k, merged);
            }
        }
    }
    Ok((out.resolve(&env), env))
}

/// Unifies a whole sequence of feature structures, left to right.
pub fn unify_all<'a, I>(
    fss: I,
    env: &Bindings,
) -> Result<(FeatureStructure, Bindings), UnifyFailure>
where
    I: IntoIterator<Item = &'a FeatureStructure>,
{
    let mut acc = FeatureStructure::new();
    let mut env = env.clone();
    for fs in fss {
        let (next, next_env) = unify(&acc, fs, &env)?;
        acc = next;
        env = next_env;
    }
    Ok((acc, env))
}

/// Convenience constructor used heavily by grammars and tests:
/// `fs(&[("case", "nom"), ("wh", "?W")])`. Values starting with `?` become
/// variables.
pub fn fs(pairs: &[(&str, &str)]) -> FeatureStructure {
    let mut out = FeatureStructure::new();
    for (k, v) in pairs {
        let value = match v.strip_prefix('?') {
            Some(name) => FeatureValue::var(name),
            None => FeatureValue::atom(v),
        };
        out.set(k, value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_clash() {
        let a = fs(&[("type", "footwear")]);
        let b = fs(&[("type", "bodywear")]);
        let err = unify(&a, &b, &Bindings::new()).unwrap_err();
        assert_eq!(err.feature, "type");
    }

    #[test]
    fn empty_is_identity() {
        let a = fs(&[("wh", "-")]);
        let (r, _) = unify(&a, &FeatureStructure::new(), &Bindings::new()).unwrap();
        assert_eq!(r, a);
        let (r, _) = unify(&FeatureStructure::new(), &a, &Bindings::new()).unwrap();
        assert_eq!(r, a);
    }

    #[test]
    fn variable_binds_to_atom() {
        let a = fs(&[("case", "?X")]);
        let b = fs(&[("case", "nom")]);
        let (r, env) = unify(&a, &b, &Bindings::new()).unwrap();
        assert_eq!(r.get("case"), Some(&FeatureValue::atom("nom")));
        assert_eq!(
            env.resolve(&FeatureValue::var("X")),
            FeatureValue::atom("nom")
        );
    }

    #[test]
    fn shared_variable_propagates_clash() {
        // ?A is forced to both + and - through two separate unifications
        // over the same environment.
        let env = Bindings::new();
        let (_, env) = unify(
            &fs(&[("animate", "?A")]),
            &fs(&[("animate", "+")]),
            &env,
        )
        .unwrap();
        let res = unify(&fs(&[("animate", "?A")]), &fs(&[("animate", "-")]), &env);
        assert!(res.is_err());
    }

    #[test]
    fn failure_leaves_env_unchanged() {
        let env = Bindings::new();
        let a = fs(&[("x", "?V"), ("y", "+")]);
        let b = fs(&[("x", "1"), ("y", "-")]);
        let before = env.clone();
        assert!(unify(&a, &b, &env).is_err());
        assert_eq!(env, before);
    }

    #[test]
    fn var_var_coindexation() {
        let (r, env) = unify(&fs(&[("n", "?A")]), &fs(&[("n", "?B")]), &Bindings::new()).unwrap();
        assert!(r.get("n").unwrap().is_var());
        // Binding either one now determines the other.
        let (_, env) = unify(&fs(&[("n", "?A")]), &fs(&[("n", "sg")]), &env).unwrap();
        assert_eq!(env.resolve(&FeatureValue::var("B")), FeatureValue::atom("sg"));
    }
}

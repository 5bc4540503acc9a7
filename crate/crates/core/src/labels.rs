use std::collections::HashMap;

/// Maps opaque class labels to dense indices in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassTable {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl ClassTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_insert(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_seen_order() {
        let mut t = ClassTable::new();
        assert_eq!(t.get_or_insert("dog"), 0);
        assert_eq!(t.get_or_insert("cat"), 1);
        assert_eq!(t.get_or_insert("dog"), 0);
        assert_eq!(t.labels(), ["dog", "cat"]);
        assert_eq!(t.index_of("cat"), Some(1));
        assert_eq!(t.index_of("cow"), None);
    }
}

use std::collections::BTreeMap;

#[derive(Debug, Clone, Default, PartialEq)]
struct Node {
    children: BTreeMap<char, usize>,
    terminal: bool,
}

/// Character trie over entry surfaces.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Trie {
    nodes: Vec<Node>,
    len: usize,
}

impl Default for Trie {
    fn default() -> Self {
        Self {
            nodes: vec![Node::default()],
            len: 0,
        }
    }
}

impl Trie {
    /// Returns `false` if `key` was already present.
    pub(crate) fn insert(&mut self, key: &str) -> bool {
        let mut at = 0;
        for ch in key.chars() {
            at = match self.nodes[at].children.get(&ch) {
                Some(&next) => next,
                None => {
                    self.nodes.push(Node::default());
                    let next = self.nodes.len() - 1;
                    self.nodes[at].children.insert(ch, next);
                    next
                }
            };
        }
        let fresh = !self.nodes[at].terminal;
        self.nodes[at].terminal = true;
        self.len += usize::from(fresh);
        fresh
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// Length in characters of the longest key that prefixes `chars`.
    pub(crate) fn longest_prefix(&self, chars: &[char]) -> Option<usize> {
        let mut at = 0;
        let mut best = None;
        for (i, ch) in chars.iter().enumerate() {
            match self.nodes[at].children.get(ch) {
                Some(&next) => at = next,
                None => break,
            }
            if self.nodes[at].terminal {
                best = Some(i + 1);
            }
        }
        best
    }

    /// All keys in lexicographic character order.
    pub(crate) fn keys(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.len);
        let mut stack = vec![(0usize, String::new())];
        while let Some((at, prefix)) = stack.pop() {
            if self.nodes[at].terminal {
                out.push(prefix.clone());
            }
            for (&ch, &next) in self.nodes[at].children.iter().rev() {
                let mut key = prefix.clone();
                key.push(ch);
                stack.push((next, key));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_prefix_prefers_longer_key() {
        let mut t = Trie::default();
        for k in ["AB", "ABC", "C"] {
            assert!(t.insert(k));
        }
        assert!(!t.insert("AB"));
        assert_eq!(t.len(), 3);
        let text: Vec<char> = "ABCD".chars().collect();
        assert_eq!(t.longest_prefix(&text), Some(3));
        assert_eq!(t.longest_prefix(&text[1..]), None);
        assert_eq!(t.keys(), vec!["AB", "ABC", "C"]);
    }
}

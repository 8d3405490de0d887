use crate::words::{Symbol, Word};

use super::key::KeyWriter;

/// Element of a free group: a freely reduced word.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FreeElement {
    word: Word,
}

impl FreeElement {
    pub fn identity(alphabet_size: usize) -> Self {
        FreeElement {
            word: Word::with_alphabet_size(alphabet_size),
        }
    }

    pub fn from_word(w: &Word) -> Self {
        FreeElement {
            word: w.free_reduce(),
        }
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    pub fn apply(&mut self, s: Symbol) {
        if self.word.last() == Some(s.inverse()) {
            self.word.pop();
        } else {
            self.word.push(s);
        }
    }

    pub(crate) fn encode(&self, w: &mut KeyWriter) {
        w.uint(self.word.len() as u64);
        w.bytes(&self.word.to_packed_bytes());
    }
}

impl PartialOrd for FreeElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FreeElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.word
            .len()
            .cmp(&other.word.len())
            .then_with(|| self.word.iter().cmp(other.word.iter()))
    }
}

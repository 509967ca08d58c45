# coding: utf-8

# # Filtering wrong isA candidates
#
# Tags are noisy.  A singer page tagged "music" yields isA(singer, music),
# which is wrong.  Three judges catch such mistakes.

# In[1]:

from taxoforge.corpus import SpoTriple
from taxoforge.generation import TAG, relation
from taxoforge.segstats import Dictionary
from taxoforge.verification import (
    AttributeModel, ThematicLexicon, TermPositions, VerifyConfig, build_incompatible_pairs,
    kl_divergence, ne_support, verify,
)


# Ten singers and ten songs, each with its own kind of infobox.  One
# singer is also tagged as music.

# In[2]:

triples, candidates = [], []
for i in range(10):
    singer, song = f"singer{i}", f"song{i}"
    triples += [SpoTriple(singer, "born", "1961"), SpoTriple(singer, "occupation", "singer")]
    triples += [SpoTriple(song, "album", "Fantasy"), SpoTriple(song, "duration", "4:29")]
    candidates += [relation(singer, "singer", TAG), relation(song, "music", TAG)]
candidates.append(relation("singer0", "music", TAG))


# "singer" and "music" share almost no hyponyms and their pooled
# attributes barely overlap, so they are incompatible.

# In[3]:

hyponyms = {}
for c in candidates:
    hyponyms.setdefault(c.hypernym, set()).add(c.hyponym)
model = AttributeModel(triples, hyponyms, alpha=0.1)
for pair in build_incompatible_pairs(candidates, model, tau_j=0.1):
    print(pair)


# singer0 sits under both.  The concept whose attribute distribution is
# farther from singer0's own (larger KL) loses.

# In[4]:

entity = model.entity("singer0")
for concept in ("singer", "music"):
    print(concept, round(kl_divergence(entity, model.concept(concept)), 3))


# Named-entity support combines how often a term is tagged as a proper
# name in text with how often it appears as a hyponym.

# In[5]:

candidates += [relation("iPhone", "America", TAG), relation("America", "country", TAG)]
print(ne_support("America", {"America": (95, 100)}, TermPositions(candidates)))


# All judges together.

# In[6]:

candidates += [relation("educational institution", "education", TAG), relation("Obama", "politics", TAG)]
accepted, filtered = verify(
    candidates, VerifyConfig(tau_j=0.1), triples=triples,
    dictionary=Dictionary.from_words(["education"]),
    lexicon=ThematicLexicon(frozenset({"politics"})),
    ne_counts={"America": (95, 100)},
)
for rel in filtered:
    print(rel.hyponym, "->", rel.hypernym, ":", rel.filter_reason)
print(len(accepted), "accepted")

# coding: utf-8

# # Estimating precision and coverage
#
# Precision comes from a labelled random sample of edges, reported with
# a Wilson interval.  Coverage asks how many user questions mention a
# taxonomy term at all.

# In[1]:

import random

from taxoforge.evaluation import LabeledSample, compute_precision, question_coverage, sample_for_labeling
from taxoforge.store import TaxonomyGraph

graph = TaxonomyGraph()
for i in range(200):
    graph.add_edge(f"entity{i}", random.Random(i).choice(["singer", "actor", "city"]), ["tag"])
graph.add_edge("Dehua Liu", "singer", ["bracket", "tag"])
graph.register_entity("Dehua Liu")


# Draw twenty edges.  In practice they go to annotators; here one of them
# is marked wrong.

# In[2]:

sample = sample_for_labeling(graph, 20, seed=0)
labelled = [LabeledSample(s.hyponym, s.hypernym, s.source, "wrong" if i == 0 else "correct")
            for i, s in enumerate(sample)]
report = compute_precision(labelled)
print(report.precision, report.wilson_95_interval)


# In[3]:

questions = ["Who is the wife of Dehua Liu", "Is every singer an actor", "What time is it"]
print(question_coverage(questions, graph))

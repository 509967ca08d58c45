# coding: utf-8

# # Building and querying a small taxonomy
#
# The test fixture holds fifty encyclopedia pages.  We run the whole
# pipeline on a copy of it and look at the result.

# In[1]:

import json
import shutil
import tempfile
from pathlib import Path

from taxoforge.pipeline import PipelineConfig, run_pipeline
from taxoforge.service import handle
from taxoforge.store import load, stats

fixture = Path(__file__).resolve().parent.parent / "tests" / "data"
workdir = Path(tempfile.mkdtemp()) / "fixture"
shutil.copytree(fixture, workdir, ignore=shutil.ignore_patterns("out"))


# In[2]:

config = PipelineConfig.from_file(workdir / "pipeline.toml")
manifest = run_pipeline(config)
for stage, info in manifest["stages"].items():
    print(stage, info["status"], info["counts"])


# The snapshot loads back into a graph.

# In[3]:

graph = load(config.output_dir / "taxonomy.snapshot")
print(stats(graph))
print(graph.get_concepts("Dehua Liu"))
print(graph.men2ent("Apple"))


# A second run with the same config reuses every stage.

# In[4]:

print({s: info["status"] for s, info in run_pipeline(config)["stages"].items()})


# The HTTP service answers the same questions.  `handle` is what the
# server calls for each GET request.

# In[5]:

status, body = handle(graph, "/getEntity?concept=singer&limit=3")
print(status, json.loads(body))

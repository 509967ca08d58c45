# coding: utf-8

# # Reading hypernyms out of a bracket compound
#
# A page title such as 刘德华（中国香港男演员） carries a compound noun in
# its bracket.  We segment it, count adjacent-word statistics over many
# such compounds, and let PMI decide which words bind first.

# In[1]:

from taxoforge import Dictionary, build_pmi_table, extract_hypernyms, segment, separate

dictionary = Dictionary.from_words(["中国", "香港", "男", "演员", "歌手", "女", "台湾", "美国", "作家"])
segment("中国香港男演员", dictionary)


# The statistics come from every bracket compound in the dump.  Here a
# handful of them is enough to make 男演员 a strong collocation.

# In[2]:

compounds = ["中国香港男演员", "香港男演员", "台湾男演员", "男演员", "男演员", "香港歌手", "中国作家",
             "美国作家", "台湾歌手", "中国台湾女歌手", "美国女作家"]
table = build_pmi_table(segment(c, dictionary) for c in compounds)
for pair in [("中国", "香港"), ("香港", "男"), ("男", "演员")]:
    print(pair, round(table(*pair), 3))


# Separation slides a three-word window from the right and merges the
# stronger pair.  The result is a binary tree.

# In[3]:

tree = separate(segment("中国香港男演员", dictionary), table)
print(tree.bracketing())


# Every node on the rightmost path below the root is a hypernym of the
# page entity, from the most specific to the head word.

# In[4]:

print(extract_hypernyms(tree))


# Space-delimited compounds work the same way.  Merged constituents are
# joined with a single space.

# In[5]:

english = Dictionary.from_words(["chief", "strategy officer"])
words = segment("ANT FINANCIAL chief strategy officer", english)
tree = separate(words, build_pmi_table([words, ["chief", "strategy officer"]]))
print(words, "->", extract_hypernyms(tree))

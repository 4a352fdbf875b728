#!/usr/bin/env python3
"""Regenerate src/speechmine/data/{conjugations,lexicon}.tsv.

The table covers the eighteen mined action classes, a set of frequent
"stop" verbs and common action verbs seen in stage directions.  Irregular
forms are listed by hand; everything else uses the regular inflection rules.
"""

from pathlib import Path

from speechmine.verbs import ConjugationTable, PosLexicon

ACTION_CLASSES = [
    "open", "phone", "kiss", "hug", "push", "point", "dance", "drink", "run",
    "count", "cook", "shoot", "drive", "enter", "fall", "follow", "hit", "eat",
]

IRREGULAR = {
    "be": "am,is,are,was,were,been,being,'s,'re,'m",
    "have": "has,had,having,'ve",
    "do": "does,did,done,doing",
    "go": "goes,went,gone,going",
    "get": "gets,got,gotten,getting",
    "come": "comes,came,coming",
    "see": "sees,saw*,seen,seeing",
    "saw": "saws,saw*,sawed,sawn,sawing",
    "lie": "lies,lay*,lain,lying,lied",
    "lay": "lays,lay*,laid,laying",
    "take": "takes,took,taken,taking",
    "make": "makes,made,making",
    "say": "says,said,saying",
    "know": "knows,knew,known,knowing",
    "hold": "holds,held,holding",
    "stand": "stands,stood,standing",
    "sit": "sits,sat,sitting",
    "fight": "fights,fought,fighting",
    "throw": "throws,threw,thrown,throwing",
    "find": "finds,found,finding",
    "leave": "leaves,left,leaving",
    "give": "gives,gave,given,giving",
    "begin": "begins,began,begun,beginning",
    "feel": "feels,felt,feeling",
    "keep": "keeps,kept,keeping",
    "put": "puts,putting",
    "run": "runs,ran,running",
    "drink": "drinks,drank,drunk,drinking",
    "shoot": "shoots,shot,shooting",
    "drive": "drives,drove,driven,driving",
    "fall": "falls,fell,fallen,falling",
    "hit": "hits,hitting",
    "eat": "eats,ate,eaten,eating",
    "swim": "swims,swam,swum,swimming",
    "catch": "catches,caught,catching",
    "bring": "brings,brought,bringing",
    "think": "thinks,thought,thinking",
    "tell": "tells,told,telling",
    "hear": "hears,heard,hearing",
    "speak": "speaks,spoke,spoken,speaking",
    "break": "breaks,broke,broken,breaking",
    "wake": "wakes,woke,woken,waking",
    "ride": "rides,rode,ridden,riding",
    "dig": "digs,dug,digging",
    "win": "wins,won,winning",
    "lose": "loses,lost,losing",
    "sing": "sings,sang,sung,singing",
    "sleep": "sleeps,slept,sleeping",
    "stick": "sticks,stuck,sticking",
    "shut": "shuts,shutting",
    "cut": "cuts,cutting",
    "let": "lets,letting",
    "set": "sets,setting",
    "turn": "turns,turned,turning",
}

REGULAR = [
    "open", "phone", "kiss", "hug", "push", "point", "dance", "count", "cook",
    "enter", "follow", "walk", "look", "smile", "stare", "nod", "grab", "pull",
    "climb", "jump", "watch", "kick", "slap", "punch", "laugh", "cry", "scream",
    "shout", "yell", "whisper", "move", "step", "rush", "glance", "wave", "touch",
    "reach", "start", "stop", "try", "pause", "sigh", "shrug", "wait", "call",
    "answer", "close", "lift", "drop", "carry", "crawl", "fish", "pour", "toast",
    "park", "aim", "fire", "sip", "chew", "bite", "listen", "talk", "ask", "pick",
    "stay", "hurry", "race", "chase", "knock", "slam", "lean", "rest", "notice",
    "appear", "disappear", "head", "hand", "show", "help", "kill", "dial", "ring",
    "embrace", "cuddle", "shove", "tumble", "trip", "stumble", "type", "play",
]

NOUN_HOMOGRAPHS = [
    "phone", "point", "drink", "shot", "count", "cook", "fall", "hit", "hug", "kiss",
    "push", "run", "dance", "drive", "kick", "look", "walk", "turn", "watch", "call",
    "step", "wave", "smile", "stare", "nod", "park", "fire", "toast", "ring", "hand",
    "head", "fish", "play", "rest", "saw", "lay", "left", "type", "trip",
]

OTHER_WORDS = {
    "DT": "the,a,an,this,that,these,those,every,each,no",
    "PRP": "i,you,he,she,it,we,they,me,him,her,us,them",
    "IN": "in,on,at,to,from,into,onto,over,under,with,without,through,across,behind,toward,towards,of,for,by,about,around,up,down,out,off",
    "CC": "and,or,but",
    "RB": "slowly,quickly,suddenly,then,again,away,back,now,here,there,not,very,just,finally,still",
    "JJ": "old,young,big,small,dark,bright,empty,quiet,loud,tired,angry,happy,nervous,cold,warm",
    "NN": "door,room,car,table,window,street,house,kitchen,office,glass,bottle,gun,money,night,day,man,woman,girl,boy,crowd,fire,smoke,bed,floor,wall,hallway,bar,phone,road,wheel",
}


def build():
    text = "".join(f"{stem}\t{forms}\n" for stem, forms in sorted(IRREGULAR.items()))
    table = ConjugationTable.parse(text).extend_regular(REGULAR)

    entries: dict[str, set[str]] = {}
    for stem, forms in table.entries.items():
        for f in forms:
            tags = entries.setdefault(f, set())
            if f == stem:
                tags.update({"VB", "VBP"})
            elif f.endswith("ing"):
                tags.add("VBG")
            elif f.endswith("s") and not f.endswith("ss"):
                tags.add("VBZ")
            else:
                tags.update({"VBD", "VBN"})
    for noun in NOUN_HOMOGRAPHS:
        entries.setdefault(noun, set()).add("NN")
    for tag, words in OTHER_WORDS.items():
        for w in words.split(","):
            entries.setdefault(w, set()).add(tag)
    lexicon = PosLexicon({w: frozenset(t) for w, t in entries.items() if "'" not in w})
    missing = [c for c in ACTION_CLASSES if c not in table]
    assert not missing, missing
    return table, lexicon


def main():
    out = Path(__file__).resolve().parents[1] / "src" / "speechmine" / "data"
    table, lexicon = build()
    header = "# stem<TAB>comma-separated forms; a trailing * marks a form shared by several stems\n"
    (out / "conjugations.tsv").write_text(header + table.dumps(), encoding="utf-8")
    (out / "lexicon.tsv").write_text("# word<TAB>comma-separated PoS tags\n" + lexicon.dumps(),
                                     encoding="utf-8")
    print(f"{len(table.entries)} stems, {len(lexicon.entries)} lexicon words")


if __name__ == "__main__":
    main()

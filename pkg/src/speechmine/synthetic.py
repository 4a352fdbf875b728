"""Seeded generator for the bundled demo corpus.

Screenplays pair stage directions that mention an action verb with speech
typical of that action (plus plenty of unrelated speech), so the whole
pipeline has something to learn.  Subtitle files reuse the same speech
distribution with captions, markup and a few broken blocks.
"""

from __future__ import annotations

import random
import textwrap
from pathlib import Path

CHARACTERS = ["ANNA", "BEN", "CLAIRE", "DEV", "ELLIS", "FRANK", "GRACE", "HUGO", "IRIS", "JONAH"]
PLACES = ["KITCHEN", "DINER", "OFFICE", "CAR", "HALLWAY", "BAR", "APARTMENT", "ROOFTOP", "PARK", "GARAGE"]
TIMES = ["DAY", "NIGHT", "LATER", "CONTINUOUS", "MORNING"]
GENRES = ["Action", "Comedy", "Drama", "Crime", "Romance", "Thriller", "Western", "Horror"]

ACTIONS = {
    "phone": (["{a} phones the station.", "{a} is phoning home again.", "{a} phoned {b} an hour ago and phones again."],
              ["Hello, thanks for calling.", "Who is this on the line?", "Hello, it's me.", "Can you hear me now?",
               "Leave a message after the tone.", "I'll call you back later, okay?", "Sorry, wrong number."]),
    "open": (["{a} opens the door.", "{a} opens the window wide.", "{b} is opening the trunk."],
             ["Please come in.", "It's unlocked, come on in.", "Let me get that for you.",
              "Somebody let some air in here.", "Come in, come in, it's freezing."]),
    "kiss": (["{a} kisses {b}.", "{a} and {b} kiss.", "{b} kissed {a} softly."],
             ["Good night my darling.", "One more kiss.", "I love you so much.", "Close your eyes.",
              "I've wanted to do that all night."]),
    "hug": (["{a} hugs {b} tightly.", "{a} and {b} hug for a long moment."],
            ["Come here, you.", "I missed you so much.", "Welcome home.", "It's so good to see you."]),
    "push": (["{a} pushes {b} away.", "{a} pushes the cart."],
             ["Get away from me!", "Back off!", "Move it, move it!", "Out of my way!"]),
    "point": (["{a} points at the hill.", "{a} is pointing across the street."],
              ["Look over there.", "It's right there.", "That one, over there.", "See that building?"]),
    "dance": (["{a} dances with {b}.", "{a} and {b} are dancing."],
              ["May I have this dance?", "Will you dance with me?", "I love this song!",
               "Come on, everybody dance!"]),
    "drink": (["{a} drinks the whiskey.", "{b} drank it in one go.", "{a} is drinking alone."],
              ["Here's a toast.", "To us!", "Cheers!", "Another round for my friends.", "Bottoms up."]),
    "run": (["{a} runs down the alley.", "{a} and {b} ran for the exit.", "{b} is running."],
            ["Run!", "Go, go, go!", "They're coming, hurry!", "Faster, they're right behind us!"]),
    "count": (["{a} counts the money.", "{a} is counting under her breath."],
              ["One, two, three, four.", "Ten, nine, eight.", "That's five hundred exactly.",
               "Twenty, forty, sixty."]),
    "cook": (["{a} cooks dinner.", "{a} is cooking eggs."],
             ["Dinner's almost ready.", "Pass me the salt.", "Don't let it burn.", "It needs more garlic."]),
    "shoot": (["{a} shoots at the car.", "{b} shot {a} twice.", "{a} is shooting wildly."],
              ["Drop the gun!", "Freeze!", "Get down!", "Hands where I can see them!"]),
    "drive": (["{a} drives through the night.", "{b} is driving too fast."],
              ["Just parking it out of the way.", "Buckle up.", "Take the next exit.",
               "Keep your eyes on the road."]),
    "enter": (["{a} enters the room.", "{b} enters quietly."],
              ["Sorry I'm late.", "Am I interrupting something?", "Knock knock.", "There you are."]),
    "fall": (["{a} falls down the stairs.", "{b} fell hard."],
             ["Whoa, watch out!", "Are you okay?", "I slipped.", "Careful, the floor is wet."]),
    "follow": (["{a} follows {b} outside.", "{a} is following the car."],
               ["Follow me.", "This way.", "Stay close behind me.", "Don't lose them."]),
    "hit": (["{a} hits {b} in the jaw.", "{b} hit the wall."],
            ["You want a piece of me?", "Take that!", "Come on, fight me!", "That's for my brother."]),
    "eat": (["{a} eats a sandwich.", "{b} is eating noodles.", "{a} ate everything."],
            ["This is delicious.", "Are you going to finish that?", "Pass the bread.", "I'm starving."]),
}

FILLER_DIRECTIONS = [
    "{a} looks at {b}.", "{a} walks to the window.", "{a} is standing by the door.", "{b} looks away.",
    "{a} walks in circles.", "{b} is quiet for a moment.", "{a} looks tired.", "{b} walks over to {a}.",
    "{a} smiles.", "{b} stares at the floor.", "{a} nods slowly.", "{b} sits on the bed.",
    "{a} turns around.", "Rain taps the glass.", "{a} waits.", "The lights flicker.",
]

NEUTRAL_SPEECH = [
    "I don't know what you mean.", "Where were you last night?", "That's not what I said.",
    "We need to talk.", "I'm fine, really.", "What time is it?", "You never listen to me.",
    "It wasn't my fault.", "Maybe tomorrow.", "I'm not sure about this.", "Do you trust me?",
    "Tell me the truth.", "Everything is going to be okay.", "Why are you doing this?",
    "I have a bad feeling about this.", "Just forget it.", "You look different.", "Is that true?",
    "Nobody has to know.", "I thought you left.", "Yeah, sure.", "No way.", "Are you serious?",
]


def _direction(rng: random.Random, template: str) -> str:
    a, b = rng.sample(CHARACTERS, 2)
    return template.format(a=a.title(), b=b.title())


def make_screenplay(rng: random.Random, scenes: int = 12) -> str:
    """One synthetic screenplay in conventional layout."""
    out = ["FADE IN:", ""]
    for _ in range(scenes):
        out += [f"INT. {rng.choice(PLACES)} - {rng.choice(TIMES)}", ""]
        for _ in range(rng.randint(3, 6)):
            if rng.random() < 0.6:
                verb = rng.choice(list(ACTIONS))
                templates, speech = ACTIONS[verb]
                direction = _direction(rng, rng.choice(templates))
                related = rng.random() < 0.75
            else:
                direction = _direction(rng, rng.choice(FILLER_DIRECTIONS))
                speech, related = NEUTRAL_SPEECH, True
            extra = _direction(rng, rng.choice(FILLER_DIRECTIONS)) if rng.random() < 0.7 else ""
            out += textwrap.wrap(f"{direction} {extra}".strip(), 58) + [""]

            lines = rng.sample(speech if related else NEUTRAL_SPEECH, k=rng.randint(1, 2))
            speaker = rng.choice(CHARACTERS)
            if rng.random() < 0.1:
                out += [f"{speaker}: {' '.join(lines)}", ""]
                continue
            cue = speaker + (" (V.O.)" if rng.random() < 0.05 else "")
            out.append(" " * 25 + cue)
            if rng.random() < 0.15:
                out.append(" " * 20 + rng.choice(["(beat)", "(quietly)", "(to " + rng.choice(CHARACTERS).title() + ")"]))
            out += textwrap.wrap(" ".join(lines), 35, initial_indent=" " * 15, subsequent_indent=" " * 15)
            out.append("")
        if rng.random() < 0.2:
            out += [" " * 50 + "(CONTINUED)", ""]
        out += [" " * 50 + rng.choice(["CUT TO:", "DISSOLVE TO:", "HARD CUT TO:", "SMASH CUT TO:"]), ""]
    out += [" " * 50 + "FADE OUT.", ""]
    return "\n".join(out)


def _ts(seconds: float) -> str:
    ms = int(round(seconds * 1000))
    h, rem = divmod(ms, 3_600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d},{ms:03d}"


def make_srt(rng: random.Random, cues: int = 60) -> tuple[str, float]:
    """Synthetic SubRip text and the video duration it implies."""
    blocks = []
    t = rng.uniform(0.5, 3.0)
    for i in range(1, cues + 1):
        if rng.random() < 0.45:
            _, speech = ACTIONS[rng.choice(list(ACTIONS))]
        else:
            speech = NEUTRAL_SPEECH
        text = " ".join(rng.sample(speech, k=1 if rng.random() < 0.8 else 2))
        if rng.random() < 0.15:
            text = text.rstrip(".!?")
        if rng.random() < 0.1:
            text = f"<i>{text}</i>"
        words = text.split()
        if len(words) > 6 and rng.random() < 0.5:
            cut = len(words) // 2
            text = " ".join(words[:cut]) + "\n" + " ".join(words[cut:])
        length = rng.uniform(1.0, 4.5)
        if rng.random() < 0.02:
            blocks.append(f"{i}\n{_ts(t + length)} --> {_ts(t)}\n{text}")
        else:
            blocks.append(f"{i}\n{_ts(t)} --> {_ts(t + length)}\n{text}")
        t += length + rng.uniform(0.2, 6.0)
    return "\n\n".join(blocks) + "\n", round(t + rng.uniform(0.0, 3.0), 3)


def write_corpus(root, screenplays: int = 20, subtitles: int = 50, seed: int = 7) -> Path:
    """Write ``screenplays/``, ``subtitles/``, ``genres.tsv`` and ``durations.tsv`` under ``root``."""
    root = Path(root)
    rng = random.Random(seed)
    (root / "screenplays").mkdir(parents=True, exist_ok=True)
    (root / "subtitles").mkdir(parents=True, exist_ok=True)
    genre_rows = []
    for i in range(screenplays):
        movie = f"movie_{i:03d}"
        (root / "screenplays" / f"{movie}.txt").write_text(make_screenplay(rng), encoding="utf-8")
        genre_rows.append(f"{movie}\t{','.join(sorted(rng.sample(GENRES, 2)))}\n")
    (root / "genres.tsv").write_text("".join(genre_rows), encoding="utf-8")
    dur_rows = []
    for i in range(subtitles):
        vid = f"video_{i:03d}"
        text, duration = make_srt(rng)
        (root / "subtitles" / f"{vid}.srt").write_text(text, encoding="utf-8")
        if i % 5 != 4:
            dur_rows.append(f"{vid}\t{duration}\n")
    (root / "durations.tsv").write_text("".join(dur_rows), encoding="utf-8")
    return root

#!/usr/bin/env python3
"""Generate the 512-token ASCII fixture vocabulary used by the tests.

Deterministic: running it twice produces the same file.

    python3 tools/make_fixture_vocab.py tests/fixtures/vocab_512.json
"""

import base64
import json
import sys

SIZE = 512
EOS = "<|eos|>"


def tokens():
    out = []

    def add(t):
        if t and t not in out:
            out.append(t)

    # Every printable byte plus newline and tab, so all fixture text tokenizes.
    for b in range(0x20, 0x7F):
        add(chr(b))
    add("\n")
    add("\t")

    # Scaffold and prompt pieces.
    for t in ["Thought: ", "Thought", "\nAction: ", "\nAction", "\nAction Input: ", "Action", " Input",
              "Input: ", "Action: ", "Description: ", "Parameters:", "Parameters: (none)", "   - ",
              "   ", " (Optional)", " (Example: ", ").", ")", "(", ".\n", "\n\n", ": ", ":"]:
        add(t)

    # JSON structure.
    for t in ['{"', '"}', '":', '": ', '", "', '","', ', "', ',"', '"', '{}', '[]', '["', '"]', '}]', '},',
              '", ', '": "', '":"', '":{', '":[', '":true', '":false', 'true', 'false', 'null', '}\n', '"}\n']:
        add(t)

    # Numbers.
    for d in range(10):
        add(str(d))
    for n in ["10", "12", "20", "24", "00", "01", "05", "100", "2024", "-1", ".5", ".0", "e1", "E-"]:
        add(n)

    # Words, alone and with a leading space.
    # Identifiers and JSON keys appear without a leading space.
    words = """flight search airport code city date time zone weather hotel room guests price stock
    symbol email send message subject body number name type class adult arrival departure currency
    amount convert source target location restaurants cuisine open book check get info days units
    history exchange interval string integer boolean required description params tool example enum
    object array _name _date _time _search _price _weather _booking _convert _email _restaurants""".split()
    for w in words:
        add(w)
        add(" " + w)

    words = """the a of for to in on and or is are be by with from at as an this that it flights
    airports prices cabin passengers find near now need want user asks should use call first then
    look up let me I will can information about arriving airline carrier forecast temperature
    celsius fahrenheit single double suite smoking allowed postal maximum per person only places
    copy recipients line text latest ticker economy business LAX JFK LHR Paris London New York USD
    EUR UTC Airline Airport Amount Arrival Book Cabin Check City Convert Copy Current Date Days Departure Find
    Historical Latest Maximum Message Number Only Postal Preferred Recipient Retrieves Room Sampling
    Search Send Smoking Source Stock Subject Target Temperature Ticker Time Today 's Weather Where
    addresses arrivals between booking checking cuisines currencies fare kind zip preferences""".split()
    # Mid-sentence words usually carry their leading space; capitalized ones start a line.
    for w in words:
        if w[0].isupper():
            add(w)
        else:
            add(" " + w)

    # Endings that close strings and free text.
    for t in ['."', 'a"', 'e"', 's"', 'n"', 't"', 'r"', 'y"', 'd"', 'o"', 'l"', 'X"', 'K"', 'R"', ' "',
              '1"', '0"', 'g"', 'h"', 'k"', 'm"', 'p"', 'c"', 'i"', 'u"', 'D"', 'C"', 'S"', 'E"', '2"',
              '5"', 'er"', 'on"', 'es"', 'ed"', 'ing"', 'al"', 'ch"', 'st"']:
        add(t)
    # Closing a container right after a value.
    for t in ['"]', '"]}', '"],', '"], "', '"]}}', ']}', '],', '], "', '}}', '}, "', '"}}', '"},',
              '"}, "', '1]', '0]', '2}', '0}', '1}', 'e}', 'e]']:
        add(t)
    for t in ["s.\n", "e.\n", "t.\n", "n.\n", "d.\n", "y.\n", "r.\n", "l.\n", "o.\n", "a.\n", "s\n",
              "e\n", "t\n", "n\n", "d\n", " \n", "!\n", "?\n", ":\n", ",\n", ")\n", "1\n", "0\n",
              "k.\n", "h.\n", "g.\n", "m.\n", "p.\n", "w.\n", "f.\n"]:
        add(t)

    # Common subwords fill the remainder.
    letters = "etaoinshrdlucmfwypvbgk"
    for a in letters:
        for b in letters:
            if len(out) >= SIZE - 1:
                break
            add(a + b)
    assert len(out) == SIZE - 1, len(out)
    add(EOS)
    return out


def main():
    path = sys.argv[1] if len(sys.argv) > 1 else "vocab_512.json"
    toks = tokens()
    doc = {
        "tokens": [base64.b64encode(t.encode("ascii")).decode("ascii") for t in toks],
        "eos": len(toks) - 1,
        "byte_fallback": False,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=0)
        f.write("\n")


if __name__ == "__main__":
    main()

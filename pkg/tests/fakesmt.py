"""Scripted stand-in for an external SMT solver process.

Reads an SMT-LIB2 script on stdin and answers according to argv:

    unsat            answer "unsat"
    sat FILE         answer with FILE's contents (a canned sat/model reply)
    sleep SECONDS    stall, then answer "unsat" (exercises process timeouts)
    garbage          answer something that is not an SMT result
    crash            exit nonzero with no output
    record FILE      append the received script to FILE, then answer "unsat"
"""

import sys
import time


def main() -> int:
    script = sys.stdin.read()
    mode = sys.argv[1] if len(sys.argv) > 1 else "unsat"
    if mode == "unsat":
        print("unsat")
    elif mode == "sat":
        sys.stdout.write(open(sys.argv[2]).read())
    elif mode == "sleep":
        time.sleep(float(sys.argv[2]))
        print("unsat")
    elif mode == "garbage":
        print("flagrant solver error")
    elif mode == "crash":
        return 3
    elif mode == "record":
        with open(sys.argv[2], "a") as f:
            f.write(script)
            f.write("\n===\n")
        print("unsat")
    else:
        print(f"fakesmt: unknown mode {mode}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

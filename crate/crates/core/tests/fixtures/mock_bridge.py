"""Line-delimited JSON evaluator used by the bridge tests.

Predicts the context's class frequencies for every query row.

  --cap N        answer "capacity" when the context has more than N rows
  --skew E       add E to the first probability of each row (unnormalized output)
  --wrong-id     answer every predict with the id plus one
  --exit-code C  exit with C after bye
"""

import argparse
import json
import sys


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cap", type=int, default=None)
    ap.add_argument("--skew", type=float, default=0.0)
    ap.add_argument("--wrong-id", action="store_true")
    ap.add_argument("--exit-code", type=int, default=0)
    args = ap.parse_args()

    def send(msg):
        sys.stdout.write(json.dumps(msg) + "\n")
        sys.stdout.flush()

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as e:
            send({"type": "error", "id": -1, "message": "bad json: %s" % e})
            continue
        kind = msg.get("type")
        if kind == "hello":
            send({"type": "hello", "protocol": 1, "name": "mock-majority"})
        elif kind == "bye":
            sys.exit(args.exit_code)
        elif kind == "predict":
            rid = msg["id"]
            cx, cy, qx = msg["context_x"], msg["context_y"], msg["query_x"]
            if args.cap is not None and len(cx) > args.cap:
                send({"type": "error", "id": rid, "message": "capacity"})
                continue
            k = msg["n_classes"]
            counts = [0.0] * k
            for y in cy:
                counts[y] += 1.0
            total = sum(counts)
            row = [c / total for c in counts]
            row[0] += args.skew
            send({
                "type": "proba",
                "id": rid + 1 if args.wrong_id else rid,
                "proba": [row for _ in qx],
            })
        else:
            send({"type": "error", "id": msg.get("id", -1), "message": "unknown type %r" % kind})
    sys.exit(0)


if __name__ == "__main__":
    main()

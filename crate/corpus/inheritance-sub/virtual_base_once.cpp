int built = 0;
struct Top {
  int t;
  Top() { built++; t = 5; }
};
struct L : virtual Top {
  int l;
};
struct R : virtual Top {
  int r;
};
struct Bottom : L, R {
  int b;
};
int main() {
  Bottom b;
  L *pl = &b;
  R *pr = &b;
  pl->t = 9;
  assert(pr->t == 9);
  assert(built == 1);
  return 0;
}

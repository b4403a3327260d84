struct Top {
  int t;
};
struct L : virtual Top {
  int l;
};
struct R : virtual Top {
  int r;
};
struct Bottom : L, R {
};
int main() {
  Bottom b;
  L *pl = &b;
  R *pr = &b;
  pl->t = 9;
  pr->t = 4;
  assert(pl->t == 9);
  return 0;
}
